use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Angle, EvalUnit, Ring};

/// Element of `Q[u, u^-1]`, stored as a sparse map exponent → coefficient.
///
/// Canonical: no stored coefficient is zero, so structural equality is ring
/// equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LaurentPoly {
    terms: BTreeMap<i32, BigRational>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: i64) -> Self {
        Self::monomial(BigRational::from_integer(c.into()), 0)
    }

    pub fn rational(num: i64, den: i64) -> Self {
        Self::monomial(BigRational::new(num.into(), den.into()), 0)
    }

    /// The symbol `u`.
    pub fn u() -> Self {
        Self::u_pow(1)
    }

    pub fn u_pow(k: i32) -> Self {
        Self::monomial(BigRational::one(), k)
    }

    pub fn monomial(c: BigRational, k: i32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(k, c);
        }
        LaurentPoly { terms }
    }

    /// Builds from `(exponent, numerator, denominator)` triples; repeated
    /// exponents are summed.
    pub fn from_terms(terms: &[(i32, i64, i64)]) -> Self {
        terms.iter().fold(Self::zero(), |acc, &(k, n, d)| {
            acc + Self::monomial(BigRational::new(n.into(), d.into()), k)
        })
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &BigRational)> {
        self.terms.iter().map(|(&k, c)| (k, c))
    }

    pub fn coeff(&self, k: i32) -> BigRational {
        self.terms.get(&k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lowest and highest exponent, `None` for zero.
    pub fn degree_range(&self) -> Option<(i32, i32)> {
        let lo = *self.terms.keys().next()?;
        let hi = *self.terms.keys().next_back()?;
        Some((lo, hi))
    }

    /// Membership in `Z[u, u^-1]`.
    pub fn is_integral(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    /// Least common denominator of the coefficients.
    pub fn denominator(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::one(), |acc, c| num_integer::Integer::lcm(&acc, c.denom()))
    }

    /// Constant value, if the polynomial has no `u` terms.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&0).cloned(),
            _ => None,
        }
    }

    /// Substitutes `u ↦ u^-1`.
    pub fn star(&self) -> Self {
        LaurentPoly {
            terms: self.terms.iter().map(|(&k, c)| (-k, c.clone())).collect(),
        }
    }

    fn add_term(&mut self, k: i32, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(k).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LaurentPoly {
            terms: self.terms.iter().map(|(&k, a)| (k, a * c)).collect(),
        }
    }

    /// Inverse in `Q[u, u^-1]`; only nonzero monomials are units.
    pub fn unit_inverse(&self) -> Option<Self> {
        if self.terms.len() != 1 {
            return None;
        }
        let (&k, c) = self.terms.iter().next()?;
        Some(Self::monomial(c.recip(), -k))
    }

    pub fn eval_complex(&self, u: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&k, c)| u.powi(k) * rat_f64(c))
            .sum()
    }
}

pub(crate) fn rat_f64(c: &BigRational) -> f64 {
    c.to_f64().unwrap_or_else(|| {
        c.numer().to_f64().unwrap_or(f64::NAN) / c.denom().to_f64().unwrap_or(f64::NAN)
    })
}

impl EvalUnit for LaurentPoly {
    /// Each power `u^k` is evaluated as `e^{i k alpha}` directly, so exact
    /// angles keep their closed forms.
    fn eval_unit(&self, alpha: &Angle) -> Complex64 {
        self.terms
            .iter()
            .map(|(&k, c)| alpha.unit_pow(k as i64) * rat_f64(c))
            .sum()
    }
}

impl Add for LaurentPoly {
    type Output = LaurentPoly;
    fn add(mut self, rhs: LaurentPoly) -> LaurentPoly {
        for (k, c) in rhs.terms {
            self.add_term(k, c);
        }
        self
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (&k, c) in &rhs.terms {
            out.add_term(k, c.clone());
        }
        out
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            terms: self.terms.iter().map(|(&k, c)| (k, -c)).collect(),
        }
    }
}

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (&k, c) in &rhs.terms {
            out.add_term(k, -c.clone());
        }
        out
    }
}

impl Sub for LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: LaurentPoly) -> LaurentPoly {
        &self - &rhs
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (&i, a) in &self.terms {
            for (&j, b) in &rhs.terms {
                out.add_term(i + j, a * b);
            }
        }
        out
    }
}

impl Mul for LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: LaurentPoly) -> LaurentPoly {
        &self * &rhs
    }
}

impl Ring for LaurentPoly {
    fn zero() -> Self {
        LaurentPoly::zero()
    }
    fn one() -> Self {
        LaurentPoly::constant(1)
    }
    fn from_int(n: i64) -> Self {
        LaurentPoly::constant(n)
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn star(&self) -> Self {
        LaurentPoly::star(self)
    }
    fn unit_inverse(&self) -> Option<Self> {
        LaurentPoly::unit_inverse(self)
    }
}

/// Ascending exponents, e.g. `u^-1+2+u` or `-3/2*u^2`.
impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (&k, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { "-" } else { "+" })?;
            }
            let mono = match k {
                0 => String::new(),
                1 => "u".to_string(),
                _ => format!("u^{k}"),
            };
            if k == 0 {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{mag}*{mono}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly({self})")
    }
}

impl serde::Serialize for LaurentPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(terms: &[(i32, i64)]) -> LaurentPoly {
        let t: Vec<(i32, i64, i64)> = terms.iter().map(|&(k, c)| (k, c, 1)).collect();
        LaurentPoly::from_terms(&t)
    }

    #[test]
    fn inverse_pair() {
        assert_eq!(&LaurentPoly::u() * &LaurentPoly::u_pow(-1), LaurentPoly::constant(1));
    }

    #[test]
    fn identity_product() {
        let p = lp(&[(0, 6), (1, 1)]);
        assert_eq!(&p * &LaurentPoly::constant(1), p);
    }

    #[test]
    fn expand_against_convolution() {
        // brute-force convolution of coefficient arrays indexed from -1
        let a = [0i64, 1, 1]; // 1 + u   (exponents -1, 0, 1)
        let b = [1i64, 1, 0]; // u^-1 + 1
        let mut conv = [0i64; 5]; // exponents -2..=2
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                conv[i + j] += x * y;
            }
        }
        let expected: Vec<(i32, i64)> =
            conv.iter().enumerate().map(|(i, &c)| (i as i32 - 2, c)).collect();
        let got = &lp(&[(0, 1), (1, 1)]) * &lp(&[(-1, 1), (0, 1)]);
        assert_eq!(got, lp(&expected));
        assert_eq!(got, lp(&[(-1, 1), (0, 2), (1, 1)]));
    }

    #[test]
    fn canonical_form_drops_zeros() {
        let p = &lp(&[(1, 1), (2, 3)]) - &lp(&[(1, 1)]);
        assert_eq!(p.terms().count(), 1);
        assert!((&p - &p).is_zero());
        assert_eq!(LaurentPoly::from_terms(&[(3, 0, 1)]), LaurentPoly::zero());
    }

    #[test]
    fn star_examples() {
        assert_eq!(lp(&[(0, 6), (1, 1)]).star(), lp(&[(0, 6), (-1, 1)]));
        assert_eq!(LaurentPoly::u_pow(3).star(), LaurentPoly::u_pow(-3));
        let sym = lp(&[(-1, 1), (0, 2), (1, 1)]);
        assert_eq!(sym.star(), sym);
    }

    #[test]
    fn eval_examples() {
        let p = lp(&[(0, 6), (1, 1)]);
        assert_eq!(p.eval_unit(&Angle::ZERO), Complex64::new(7.0, 0.0));
        assert_eq!(LaurentPoly::u().eval_unit(&Angle::pi_frac(1, 2)), Complex64::new(0.0, 1.0));
        for alpha in [0.1, 0.7, 2.0, -1.3, 3.0] {
            let a = Angle::radians(alpha);
            let prod = &lp(&[(0, 1), (1, 1)]) * &lp(&[(0, 1), (-1, 1)]);
            let direct = (Complex64::new(1.0, 0.0) + a.unit()).norm_sqr();
            assert!((prod.eval_unit(&a) - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn integrality_and_display() {
        let p = LaurentPoly::from_terms(&[(1, 1, 2), (0, -1, 1)]);
        assert!(!p.is_integral());
        assert_eq!(p.denominator(), BigInt::from(2));
        assert_eq!(p.to_string(), "-1+1/2*u");
        assert_eq!(lp(&[(-1, 1), (0, 3)]).to_string(), "u^-1+3");
        assert_eq!(lp(&[(1, 1), (0, 6)]).to_string(), "6+u");
        assert!(lp(&[(-1, 1), (0, 3)]).is_integral());
    }

    #[test]
    fn units() {
        let m = LaurentPoly::from_terms(&[(3, 2, 5)]);
        assert_eq!(&m * &m.unit_inverse().unwrap(), LaurentPoly::constant(1));
        assert!(lp(&[(0, 1), (1, 1)]).unit_inverse().is_none());
        assert!(LaurentPoly::zero().unit_inverse().is_none());
    }
}
