use std::fmt;

use num_complex::Complex64;
use num_rational::BigRational;

use super::{is_squarefree, Angle, EvalUnit, LaurentPoly, Ring, ScalarError};

/// Element `c0 + c1 sqrt2 + c2 sqrt(d) + c3 sqrt(2d)` with `ci` in `Q[u, u^-1]`.
///
/// `d` is a tag shared by all entries of one matrix. The tag `0` is a
/// wildcard used by elements whose `c2`, `c3` vanish; it combines with any
/// `d`. For `d` in {1, 2} the basis is degenerate (`sqrt(2d)` or `sqrt(d)`
/// is rational or equal to `sqrt 2`) and values are folded onto `1, sqrt2`.
#[derive(Clone)]
pub struct ExtScalar {
    d: u32,
    c: [LaurentPoly; 4],
}

impl ExtScalar {
    pub fn new(d: u32, c: [LaurentPoly; 4]) -> Result<Self, ScalarError> {
        if d != 0 && !is_squarefree(d) {
            return Err(ScalarError::NotSquarefree(d));
        }
        let mut x = ExtScalar { d, c };
        x.normalize();
        Ok(x)
    }

    pub fn from_laurent(p: LaurentPoly) -> Self {
        ExtScalar {
            d: 0,
            c: [p, LaurentPoly::zero(), LaurentPoly::zero(), LaurentPoly::zero()],
        }
    }

    pub fn rational(num: i64, den: i64) -> Self {
        Self::from_laurent(LaurentPoly::rational(num, den))
    }

    pub fn int(n: i64) -> Self {
        Self::rational(n, 1)
    }

    pub fn u() -> Self {
        Self::from_laurent(LaurentPoly::u())
    }

    /// `(num/den) * sqrt 2`.
    pub fn sqrt2(num: i64, den: i64) -> Self {
        ExtScalar {
            d: 0,
            c: [
                LaurentPoly::zero(),
                LaurentPoly::rational(num, den),
                LaurentPoly::zero(),
                LaurentPoly::zero(),
            ],
        }
    }

    /// `(num/den) * sqrt d`.
    pub fn sqrt_d(d: u32, num: i64, den: i64) -> Result<Self, ScalarError> {
        let z = LaurentPoly::zero;
        Self::new(d, [z(), z(), LaurentPoly::rational(num, den), z()])
    }

    /// `(num/den) * sqrt(2d)`.
    pub fn sqrt_2d(d: u32, num: i64, den: i64) -> Result<Self, ScalarError> {
        let z = LaurentPoly::zero;
        Self::new(d, [z(), z(), z(), LaurentPoly::rational(num, den)])
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn components(&self) -> &[LaurentPoly; 4] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(LaurentPoly::is_zero)
    }

    /// The `Q[u, u^-1]` part when the irrational components vanish.
    pub fn as_laurent(&self) -> Option<&LaurentPoly> {
        if self.c[1..].iter().all(LaurentPoly::is_zero) {
            Some(&self.c[0])
        } else {
            None
        }
    }

    fn normalize(&mut self) {
        let [c0, c1, c2, c3] = std::mem::take(&mut self.c);
        self.c = match self.d {
            // sqrt d = 1, sqrt 2d = sqrt 2
            1 => [&c0 + &c2, &c1 + &c3, LaurentPoly::zero(), LaurentPoly::zero()],
            // sqrt d = sqrt 2, sqrt 2d = 2
            2 => [
                &c0 + &c3.scale(&BigRational::from_integer(2.into())),
                &c1 + &c2,
                LaurentPoly::zero(),
                LaurentPoly::zero(),
            ],
            _ => [c0, c1, c2, c3],
        };
    }

    fn join_tag(&self, rhs: &Self) -> Result<u32, ScalarError> {
        match (self.d, rhs.d) {
            (0, d) | (d, 0) => Ok(d),
            (a, b) if a == b => Ok(a),
            (a, b) => Err(ScalarError::TagMismatch { left: a, right: b }),
        }
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self, ScalarError> {
        let d = self.join_tag(rhs)?;
        Ok(ExtScalar {
            d,
            c: std::array::from_fn(|i| &self.c[i] + &rhs.c[i]),
        })
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self, ScalarError> {
        self.checked_add(&rhs.neg_ref())
    }

    /// Product under `sqrt2^2 = 2`, `sqrt d^2 = d`, `sqrt2 sqrt d = sqrt 2d`,
    /// `sqrt2 sqrt 2d = 2 sqrt d`, `sqrt d sqrt 2d = d sqrt2`,
    /// `sqrt 2d^2 = 2d`.
    pub fn checked_mul(&self, rhs: &Self) -> Result<Self, ScalarError> {
        let d = self.join_tag(rhs)?;
        let [a0, a1, a2, a3] = &self.c;
        let [b0, b1, b2, b3] = &rhs.c;
        let k = |n: i64| BigRational::from_integer(n.into());
        let dd = k(d as i64);
        let two = k(2);
        let c0 = &(&(a0 * b0) + &(a1 * b1).scale(&two))
            + &(&(a2 * b2).scale(&dd) + &(a3 * b3).scale(&(&two * &dd)));
        let c1 = &(&(a0 * b1) + &(a1 * b0)) + &(&(a2 * b3) + &(a3 * b2)).scale(&dd);
        let c2 = &(&(a0 * b2) + &(a2 * b0)) + &(&(a1 * b3) + &(a3 * b1)).scale(&two);
        let c3 = &(&(a0 * b3) + &(a3 * b0)) + &(&(a1 * b2) + &(a2 * b1));
        let mut out = ExtScalar { d, c: [c0, c1, c2, c3] };
        out.normalize();
        Ok(out)
    }

    fn galois(&self, flip_sqrt2: bool, flip_sqrtd: bool) -> Self {
        let sign = |p: &LaurentPoly, f: bool| if f { -p } else { p.clone() };
        ExtScalar {
            d: self.d,
            c: [
                self.c[0].clone(),
                sign(&self.c[1], flip_sqrt2),
                sign(&self.c[2], flip_sqrtd),
                sign(&self.c[3], flip_sqrt2 ^ flip_sqrtd),
            ],
        }
    }

    /// Inverse through the norm to `Q[u, u^-1]`: exists iff the norm is a
    /// nonzero monomial.
    pub fn unit_inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let single = self.d <= 2 || (self.c[2].is_zero() && self.c[3].is_zero());
        let cofactor = if single {
            self.galois(true, false)
        } else {
            let a = self.galois(true, false);
            let b = self.galois(false, true);
            let ab = self.galois(true, true);
            a.checked_mul(&b).ok()?.checked_mul(&ab).ok()?
        };
        let norm = self.checked_mul(&cofactor).ok()?;
        let n_inv = norm.as_laurent()?.unit_inverse()?;
        cofactor.checked_mul(&ExtScalar::from_laurent(n_inv)).ok()
    }

    pub fn eval_complex(&self, u: Complex64) -> Complex64 {
        self.combine(|p| p.eval_complex(u))
    }

    fn combine(&self, f: impl Fn(&LaurentPoly) -> Complex64) -> Complex64 {
        let d = self.d as f64;
        let basis = [1.0, 2f64.sqrt(), d.sqrt(), (2.0 * d).sqrt()];
        self.c
            .iter()
            .zip(basis)
            .filter(|(p, _)| !p.is_zero())
            .map(|(p, b)| f(p) * b)
            .sum()
    }
}

/// Values compare by components; the tag only matters when a `sqrt d`
/// component is present.
impl PartialEq for ExtScalar {
    fn eq(&self, other: &Self) -> bool {
        let tags_agree = self.d == other.d
            || self.d == 0
            || other.d == 0
            || self.c[2..].iter().chain(&other.c[2..]).all(LaurentPoly::is_zero);
        tags_agree && self.c == other.c
    }
}

impl Eq for ExtScalar {}

impl std::hash::Hash for ExtScalar {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.c.hash(state);
    }
}

impl EvalUnit for ExtScalar {
    fn eval_unit(&self, alpha: &Angle) -> Complex64 {
        self.combine(|p| p.eval_unit(alpha))
    }
}

impl Ring for ExtScalar {
    fn zero() -> Self {
        ExtScalar::int(0)
    }
    fn one() -> Self {
        ExtScalar::int(1)
    }
    fn from_int(n: i64) -> Self {
        ExtScalar::int(n)
    }
    fn is_zero(&self) -> bool {
        ExtScalar::is_zero(self)
    }
    /// Panics on mismatched `d` tags; use [`ExtScalar::checked_add`] to
    /// handle that case.
    fn add_ref(&self, rhs: &Self) -> Self {
        self.checked_add(rhs).expect("extension scalar tag mismatch")
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        self.checked_sub(rhs).expect("extension scalar tag mismatch")
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self.checked_mul(rhs).expect("extension scalar tag mismatch")
    }
    fn neg_ref(&self) -> Self {
        ExtScalar {
            d: self.d,
            c: std::array::from_fn(|i| -&self.c[i]),
        }
    }
    fn star(&self) -> Self {
        ExtScalar {
            d: self.d,
            c: std::array::from_fn(|i| self.c[i].star()),
        }
    }
    fn unit_inverse(&self) -> Option<Self> {
        ExtScalar::unit_inverse(self)
    }
}

impl fmt::Display for ExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["".to_string(), "sqrt2".to_string(), format!("sqrt{}", self.d), format!("sqrt{}", 2 * self.d)];
        let parts: Vec<String> = self
            .c
            .iter()
            .zip(names)
            .filter(|(p, _)| !p.is_zero())
            .map(|(p, name)| {
                if name.is_empty() {
                    p.to_string()
                } else {
                    format!("({p})*{name}")
                }
            })
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl fmt::Debug for ExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExtScalar[d={}]({self})", self.d)
    }
}

impl serde::Serialize for ExtScalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_entries() {
        let r2 = ExtScalar::sqrt2(1, 1);
        assert_eq!(r2.checked_mul(&r2).unwrap(), ExtScalar::int(2));
        let rd = ExtScalar::sqrt_d(7, 1, 1).unwrap();
        assert_eq!(r2.checked_mul(&rd).unwrap(), ExtScalar::sqrt_2d(7, 1, 1).unwrap());
        let r2d = ExtScalar::sqrt_2d(7, 1, 1).unwrap();
        assert_eq!(r2d.checked_mul(&r2d).unwrap(), ExtScalar::int(14));
        assert_eq!(r2.checked_mul(&r2d).unwrap(), ExtScalar::sqrt_d(7, 2, 1).unwrap());
        assert_eq!(rd.checked_mul(&r2d).unwrap(), ExtScalar::sqrt2(7, 1));
        assert_eq!(rd.checked_mul(&rd).unwrap(), ExtScalar::int(7));
    }

    #[test]
    fn square_of_sum() {
        // (sqrt2 + sqrt d)^2 = 2 + d + 2 sqrt(2d)
        for d in [3u32, 5, 7, 11] {
            let x = ExtScalar::sqrt2(1, 1).checked_add(&ExtScalar::sqrt_d(d, 1, 1).unwrap()).unwrap();
            let sq = x.checked_mul(&x).unwrap();
            let expected = ExtScalar::int(2 + d as i64)
                .checked_add(&ExtScalar::sqrt_2d(d, 2, 1).unwrap())
                .unwrap();
            assert_eq!(sq, expected);
        }
        // d = 2: sqrt2 + sqrt2 = 2 sqrt2, squared = 8 = 2 + 2 + 2*2
        let x = ExtScalar::sqrt2(1, 1).checked_add(&ExtScalar::sqrt_d(2, 1, 1).unwrap()).unwrap();
        let sq = x.checked_mul(&x).unwrap();
        assert_eq!(sq, ExtScalar::int(8));
        let numeric = (2f64.sqrt() + 2f64.sqrt()).powi(2);
        assert!((sq.eval_unit(&Angle::ZERO).re - numeric).abs() < 1e-12);
    }

    #[test]
    fn fold_d2() {
        assert_eq!(ExtScalar::sqrt_2d(2, 1, 1).unwrap(), ExtScalar::int(2));
        assert_eq!(ExtScalar::sqrt_d(2, 1, 1).unwrap(), ExtScalar::sqrt2(1, 1));
    }

    #[test]
    fn mismatched_tags() {
        let a = ExtScalar::sqrt_d(7, 1, 1).unwrap();
        let b = ExtScalar::sqrt_d(11, 1, 1).unwrap();
        assert_eq!(
            a.checked_mul(&b),
            Err(ScalarError::TagMismatch { left: 7, right: 11 })
        );
        assert!(a.checked_add(&b).is_err());
        // wildcard tag combines with anything
        assert!(a.checked_mul(&ExtScalar::sqrt2(1, 1)).is_ok());
    }

    #[test]
    fn not_squarefree() {
        assert_eq!(ExtScalar::sqrt_d(4, 1, 1), Err(ScalarError::NotSquarefree(4)));
        assert_eq!(ExtScalar::sqrt_d(12, 1, 1), Err(ScalarError::NotSquarefree(12)));
    }

    #[test]
    fn inverses() {
        let d = 7;
        let x = ExtScalar::u()
            .checked_mul(&ExtScalar::sqrt_2d(d, -1, 2).unwrap())
            .unwrap();
        let inv = x.unit_inverse().unwrap();
        assert_eq!(x.checked_mul(&inv).unwrap(), ExtScalar::int(1));
        let y = ExtScalar::int(1).checked_add(&ExtScalar::sqrt2(1, 1)).unwrap(); // unit 1+sqrt2
        assert_eq!(y.checked_mul(&y.unit_inverse().unwrap()).unwrap(), ExtScalar::int(1));
        // 1 + u is not a unit
        assert!(ExtScalar::from_laurent(&LaurentPoly::constant(1) + &LaurentPoly::u())
            .unit_inverse()
            .is_none());
    }

    #[test]
    fn star_conjugates_u_only() {
        let x = ExtScalar::u().checked_mul(&ExtScalar::sqrt_d(11, 3, 1).unwrap()).unwrap();
        let a = Angle::radians(0.9);
        assert!((x.star().eval_unit(&a) - x.eval_unit(&a).conj()).norm() < 1e-12);
    }
}
