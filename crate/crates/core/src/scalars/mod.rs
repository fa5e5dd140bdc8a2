//! Arithmetic backends.
//!
//! Two kinds of scalars are used throughout the crate:
//!
//! * exact ones, [`LaurentPoly`] (elements of `Q[u, u^-1]`) and [`ExtScalar`]
//!   (elements of `Q(sqrt 2, sqrt d) ⊗ Q[u, u^-1]`), where the symbol `u` stands
//!   for a point of the unit circle, so that complex conjugation acts as
//!   `u ↦ u^-1`;
//! * the numeric one, [`CScalar`], a double precision complex number.
//!
//! Matrices are generic over the [`Ring`] trait, which all three implement.

mod angle;
mod ext;
mod laurent;

pub use angle::Angle;
pub use ext::ExtScalar;
pub use laurent::LaurentPoly;

use std::fmt::Debug;

use num_complex::Complex64;
use thiserror::Error;

/// Numeric backend scalar.
pub type CScalar = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScalarError {
    #[error("cannot combine extension scalars with d = {left} and d = {right}")]
    TagMismatch { left: u32, right: u32 },
    #[error("d = {0} is not a squarefree positive integer")]
    NotSquarefree(u32),
    #[error("cannot parse angle {0:?}")]
    AngleParse(String),
    #[error("non-finite numeric scalar {0}")]
    NonFinite(CScalar),
}

/// Commutative ring with an involution (`star`), as needed by matrix code.
///
/// For the exact backends `star` substitutes `u^-1` for `u`; this is complex
/// conjugation only when `u` lies on the unit circle.
pub trait Ring: Clone + PartialEq + Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(n: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn add_ref(&self, rhs: &Self) -> Self;
    fn sub_ref(&self, rhs: &Self) -> Self;
    fn mul_ref(&self, rhs: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    fn star(&self) -> Self;
    /// Inverse, when `self` is a unit of the ring.
    fn unit_inverse(&self) -> Option<Self>;

    fn is_one(&self) -> bool {
        self.sub_ref(&Self::one()).is_zero()
    }
}

impl Ring for CScalar {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_int(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
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
        self.conj()
    }
    fn unit_inverse(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.inv())
        }
    }
}

/// Rejects NaN and infinite inputs.
pub fn check_finite(z: CScalar) -> Result<CScalar, ScalarError> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(ScalarError::NonFinite(z))
    }
}

/// Exact-to-numeric evaluation at `u = e^{i alpha}`.
pub trait EvalUnit {
    fn eval_unit(&self, alpha: &Angle) -> CScalar;
}

impl EvalUnit for CScalar {
    fn eval_unit(&self, _alpha: &Angle) -> CScalar {
        *self
    }
}

/// Substitutes `u = e^{i alpha}` into `a`.
pub fn eval_unit(a: &LaurentPoly, alpha: &Angle) -> CScalar {
    a.eval_unit(alpha)
}

pub fn laurent_mul(a: &LaurentPoly, b: &LaurentPoly) -> LaurentPoly {
    a.mul_ref(b)
}

pub fn laurent_star(a: &LaurentPoly) -> LaurentPoly {
    a.star()
}

pub fn ext_mul(x: &ExtScalar, y: &ExtScalar) -> Result<ExtScalar, ScalarError> {
    x.checked_mul(y)
}

/// Whether `d >= 1` has no repeated prime factor.
pub fn is_squarefree(d: u32) -> bool {
    if d == 0 {
        return false;
    }
    let mut p = 2u32;
    while p.saturating_mul(p) <= d {
        if d.is_multiple_of(p * p) {
            return false;
        }
        p += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squarefree() {
        let sf: Vec<u32> = (1..20).filter(|&d| is_squarefree(d)).collect();
        assert_eq!(sf, vec![1, 2, 3, 5, 6, 7, 10, 11, 13, 14, 15, 17, 19]);
        assert!(!is_squarefree(0));
    }

    #[test]
    fn finite_check() {
        assert!(check_finite(CScalar::new(1.0, -2.0)).is_ok());
        assert!(check_finite(CScalar::new(f64::NAN, 0.0)).is_err());
        assert!(check_finite(CScalar::new(0.0, f64::INFINITY)).is_err());
    }
}
