use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{Signed, Zero};
use serde::{Serialize, Serializer};

use super::ScalarError;

/// An angle, kept exact when it is known to be a rational multiple of `pi`
/// or a rational number of radians.
///
/// The exact kinds let callers decide whether `theta / pi` is rational:
/// a nonzero rational number of radians is never a rational multiple of `pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    /// `(p/q) * pi`, lowest terms, `q > 0`.
    PiFraction(Rational64),
    /// `p/q` radians.
    RationalRadians(Rational64),
    /// Raw floating radians; nothing is known about rationality.
    Radians(f64),
}

impl Angle {
    pub const ZERO: Angle = Angle::PiFraction(Rational64::new_raw(0, 1));

    pub fn pi_frac(num: i64, den: i64) -> Angle {
        Angle::PiFraction(Rational64::new(num, den))
    }

    pub fn rational_radians(num: i64, den: i64) -> Angle {
        let r = Rational64::new(num, den);
        if r.is_zero() {
            Angle::ZERO
        } else {
            Angle::RationalRadians(r)
        }
    }

    pub fn radians(x: f64) -> Angle {
        Angle::Radians(x)
    }

    pub fn to_radians(&self) -> f64 {
        match *self {
            Angle::PiFraction(r) => ratio_f64(r) * PI,
            Angle::RationalRadians(r) => ratio_f64(r),
            Angle::Radians(x) => x,
        }
    }

    /// `k * self`, keeping the kind.
    pub fn scale(&self, k: i64) -> Angle {
        match *self {
            Angle::PiFraction(r) => Angle::PiFraction(r * k),
            Angle::RationalRadians(r) => Angle::rational_radians(*(r * k).numer(), *(r * k).denom()),
            Angle::Radians(x) => Angle::Radians(x * k as f64),
        }
    }

    pub fn neg(&self) -> Angle {
        self.scale(-1)
    }

    /// Whether `self / pi` is rational, when decidable from the representation.
    pub fn pi_rational(&self) -> Option<bool> {
        match *self {
            Angle::PiFraction(_) => Some(true),
            Angle::RationalRadians(r) => Some(r.is_zero()),
            Angle::Radians(_) => None,
        }
    }

    /// Whether the angle is `0 mod 2 pi`. Raw angles are compared at 1e-15.
    pub fn is_zero_mod_2pi(&self) -> bool {
        match *self {
            Angle::PiFraction(r) => r.denom() == &1 && r.numer().is_even(),
            Angle::RationalRadians(r) => r.is_zero(),
            Angle::Radians(x) => {
                let m = x.rem_euclid(2.0 * PI);
                m.min(2.0 * PI - m) <= 1e-15
            }
        }
    }

    /// `(cos, sin)`, using closed forms for multiples of `pi/d` with
    /// `d` in {1, 2, 3, 4, 6}.
    pub fn cos_sin(&self) -> (f64, f64) {
        if let Angle::PiFraction(r) = *self {
            // reduce to [0, 2)
            let den = *r.denom();
            let num = r.numer().rem_euclid(2 * den);
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let s3 = 3f64.sqrt() / 2.0;
            let (c, s) = match (num, den) {
                (0, 1) => (1.0, 0.0),
                (1, 1) => (-1.0, 0.0),
                (1, 2) => (0.0, 1.0),
                (3, 2) => (0.0, -1.0),
                (1, 3) => (0.5, s3),
                (2, 3) => (-0.5, s3),
                (4, 3) => (-0.5, -s3),
                (5, 3) => (0.5, -s3),
                (1, 4) => (h, h),
                (3, 4) => (-h, h),
                (5, 4) => (-h, -h),
                (7, 4) => (h, -h),
                (1, 6) => (s3, 0.5),
                (5, 6) => (-s3, 0.5),
                (7, 6) => (-s3, -0.5),
                (11, 6) => (s3, -0.5),
                _ => {
                    let x = num as f64 / den as f64 * PI;
                    (x.cos(), x.sin())
                }
            };
            return (c, s);
        }
        let x = self.to_radians();
        (x.cos(), x.sin())
    }

    /// `e^{i self}`.
    pub fn unit(&self) -> Complex64 {
        let (c, s) = self.cos_sin();
        Complex64::new(c, s)
    }

    /// `e^{i k self}`, with the closed forms applied to `k * self`.
    pub fn unit_pow(&self, k: i64) -> Complex64 {
        self.scale(k).unit()
    }
}

fn ratio_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn fmt_ratio(r: Rational64) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Angle::PiFraction(r) => {
                if r.is_zero() {
                    write!(f, "0")
                } else if r.abs() == Rational64::from_integer(1) {
                    write!(f, "{}pi", if r.is_negative() { "-" } else { "" })
                } else {
                    write!(f, "{}pi", fmt_ratio(r))
                }
            }
            Angle::RationalRadians(r) => write!(f, "{}rad", fmt_ratio(r)),
            Angle::Radians(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

fn parse_ratio(s: &str) -> Option<Rational64> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().ok()?;
            let d: i64 = d.trim().parse().ok()?;
            if d == 0 {
                None
            } else {
                Some(Rational64::new(n, d))
            }
        }
        None => s.parse::<i64>().ok().map(Rational64::from_integer),
    }
}

/// Accepted forms: `pi`, `-pi`, `2/3pi`, `2/3*pi`, `pi/3`, `-pi/4`, `1rad`,
/// `1/3rad`, and plain decimals (raw radians).
impl FromStr for Angle {
    type Err = ScalarError;

    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let err = || ScalarError::AngleParse(input.to_string());
        let s = input.trim();
        if s.is_empty() {
            return Err(err());
        }
        if let Some(body) = s.strip_suffix("rad") {
            let r = parse_ratio(body).ok_or_else(err)?;
            return Ok(Angle::rational_radians(*r.numer(), *r.denom()));
        }
        if let Some(idx) = s.find("pi") {
            let (head, tail) = (&s[..idx], &s[idx + 2..]);
            let head = head.trim_end_matches('*').trim();
            let coeff = match head {
                "" | "+" => Rational64::from_integer(1),
                "-" => Rational64::from_integer(-1),
                h => parse_ratio(h).ok_or_else(err)?,
            };
            let coeff = if tail.is_empty() {
                coeff
            } else {
                let den: i64 = tail.strip_prefix('/').ok_or_else(err)?.trim().parse().map_err(|_| err())?;
                if den == 0 {
                    return Err(err());
                }
                coeff / den
            };
            return Ok(Angle::PiFraction(coeff));
        }
        if let Some(r) = parse_ratio(s) {
            if r.is_zero() {
                return Ok(Angle::ZERO);
            }
        }
        let x: f64 = s.parse().map_err(|_| err())?;
        if !x.is_finite() {
            return Err(err());
        }
        Ok(Angle::Radians(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!("pi".parse::<Angle>().unwrap(), Angle::pi_frac(1, 1));
        assert_eq!("-pi".parse::<Angle>().unwrap(), Angle::pi_frac(-1, 1));
        assert_eq!("2/3pi".parse::<Angle>().unwrap(), Angle::pi_frac(2, 3));
        assert_eq!("4/6*pi".parse::<Angle>().unwrap(), Angle::pi_frac(2, 3));
        assert_eq!("-pi/4".parse::<Angle>().unwrap(), Angle::pi_frac(-1, 4));
        assert_eq!("1rad".parse::<Angle>().unwrap(), Angle::rational_radians(1, 1));
        assert_eq!("0".parse::<Angle>().unwrap(), Angle::ZERO);
        assert_eq!("0.5".parse::<Angle>().unwrap(), Angle::Radians(0.5));
        assert!("pi/0".parse::<Angle>().is_err());
        assert!("abc".parse::<Angle>().is_err());
        assert!("".parse::<Angle>().is_err());
    }

    #[test]
    fn display_roundtrip() {
        for a in [
            Angle::pi_frac(2, 3),
            Angle::pi_frac(-1, 1),
            Angle::ZERO,
            Angle::rational_radians(-1, 3),
            Angle::radians(0.25),
        ] {
            assert_eq!(a.to_string().parse::<Angle>().unwrap(), a);
        }
    }

    #[test]
    fn closed_forms() {
        assert_eq!(Angle::pi_frac(1, 2).unit(), Complex64::new(0.0, 1.0));
        assert_eq!(Angle::pi_frac(1, 3).cos_sin().0, 0.5);
        assert_eq!(Angle::pi_frac(-2, 3).cos_sin().0, -0.5);
        assert_eq!(Angle::pi_frac(1, 2).unit_pow(4), Complex64::new(1.0, 0.0));
        let a = Angle::pi_frac(1, 5);
        assert!((a.unit() - Complex64::new((PI / 5.0).cos(), (PI / 5.0).sin())).norm() < 1e-15);
    }

    #[test]
    fn rationality() {
        assert_eq!(Angle::pi_frac(3, 7).pi_rational(), Some(true));
        assert_eq!(Angle::rational_radians(1, 1).pi_rational(), Some(false));
        assert_eq!(Angle::rational_radians(0, 1).pi_rational(), Some(true));
        assert_eq!(Angle::radians(1.0).pi_rational(), None);
        assert!(Angle::pi_frac(4, 1).is_zero_mod_2pi());
        assert!(!Angle::pi_frac(1, 1).is_zero_mod_2pi());
        assert!(Angle::radians(2.0 * PI).is_zero_mod_2pi());
    }
}
