//! Isometry types of form-preserving matrices.
//!
//! A matrix `A` preserving a Hermitian form of signature `(n, 1)` acts on
//! hyperbolic space. Its type is read off the spectrum of `A` after
//! rescaling to `|det A| = 1`:
//!
//! * diagonalizable, all eigenvalues of modulus 1: elliptic;
//! * diagonalizable, exactly `N - 2` eigenvalues of modulus 1: loxodromic;
//! * not diagonalizable: parabolic.
//!
//! Parabolics are refined into unipotent ones (2-step, `(A - I)^2 = 0`, or
//! 3-step, `(A - I)^3 = 0`, up to a unit scalar) and ellipto-parabolic ones.
//! Elliptics are split by whether they fix a point of the boundary.

use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::matform::{eigen, form_defect, herm_eigenvalues, null_space, shifted, singular_values, CMat, EigenData, FormConvention, HermForm, MatError};
use crate::scalars::CScalar;

/// Rank decisions closer than this factor to the threshold are refused.
pub const MIN_MARGIN: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParabolicKind {
    UnipotentStep2,
    UnipotentStep3,
    EllipticParabolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IsoClass {
    Identity,
    Elliptic { boundary: bool },
    Parabolic(ParabolicKind),
    Loxodromic,
}

impl IsoClass {
    pub fn tag(&self) -> &'static str {
        match self {
            IsoClass::Identity => "identity",
            IsoClass::Elliptic { boundary: false } => "elliptic",
            IsoClass::Elliptic { boundary: true } => "boundary-elliptic",
            IsoClass::Parabolic(ParabolicKind::UnipotentStep2) => "unipotent-2-step",
            IsoClass::Parabolic(ParabolicKind::UnipotentStep3) => "unipotent-3-step",
            IsoClass::Parabolic(ParabolicKind::EllipticParabolic) => "ellipto-parabolic",
            IsoClass::Loxodromic => "loxodromic",
        }
    }

    pub fn is_parabolic(&self) -> bool {
        matches!(self, IsoClass::Parabolic(_))
    }

    pub fn is_unipotent(&self) -> bool {
        matches!(
            self,
            IsoClass::Parabolic(ParabolicKind::UnipotentStep2 | ParabolicKind::UnipotentStep3)
        )
    }

    pub fn is_elliptic(&self) -> bool {
        matches!(self, IsoClass::Elliptic { .. })
    }
}

impl fmt::Display for IsoClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl Serialize for IsoClass {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IsoError {
    #[error("matrix does not preserve the form (relative defect {defect:e} > {tol:e})")]
    FormDefect { defect: f64, tol: f64 },
    #[error("classification indeterminate: rank margin {margin:.3} below {MIN_MARGIN}")]
    Indeterminate { margin: f64 },
    #[error("spectrum is inconsistent with an isometry: {0}")]
    Spectrum(String),
    #[error("matrix is not parabolic")]
    NotParabolic,
    #[error(transparent)]
    Mat(#[from] MatError),
}

/// Classification with the data it was derived from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub class: IsoClass,
    pub eigen: EigenData,
    /// Relative form defect of the normalized matrix.
    pub form_defect: f64,
}

/// `A / |det A|^(1/N)`.
pub fn normalize(a: &CMat) -> Result<CMat, IsoError> {
    let det = a.det();
    if !(det.norm() > 0.0) || !a.is_finite() {
        return Err(MatError::Singular.into());
    }
    let s = det.norm().powf(-1.0 / a.n() as f64);
    Ok(a.scale(&CScalar::new(s, 0.0)))
}

fn relative_form_defect(a: &CMat, j: &HermForm<CScalar>) -> Result<f64, IsoError> {
    let scale = j.matrix().max_abs().max(f64::MIN_POSITIVE) * a.max_abs().powi(2).max(1.0);
    Ok(form_defect(a, j, FormConvention::ConjTranspose)? / scale)
}

fn is_scalar_identity(a: &CMat, tol: f64) -> Result<bool, IsoError> {
    // the largest diagonal entry is a safe scale even when a_11 = 0
    let lambda = (0..a.n())
        .map(|i| *a.get(i, i))
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))
        .unwrap_or_default();
    if lambda.norm() == 0.0 {
        return Ok(false);
    }
    let b = a.scale(&lambda.inv());
    Ok(b.max_abs_diff(&CMat::identity(a.n()))? <= tol)
}

fn is_unit(z: CScalar, tol: f64) -> bool {
    (z.norm() - 1.0).abs() <= tol
}

/// Classifies `A` preserving `J` in the convention `A* J A = J`.
pub fn classify(a: &CMat, j: &HermForm<CScalar>, tol: f64) -> Result<IsoClass, IsoError> {
    Ok(classify_detailed(a, j, tol)?.class)
}

pub fn classify_detailed(a: &CMat, j: &HermForm<CScalar>, tol: f64) -> Result<Classification, IsoError> {
    let a = normalize(a)?;
    let defect = relative_form_defect(&a, j)?;
    if defect > tol {
        return Err(IsoError::FormDefect { defect, tol });
    }
    let ev = eigen(&a, tol)?;
    if is_scalar_identity(&a, tol)? {
        return Ok(Classification { class: IsoClass::Identity, eigen: ev, form_defect: defect });
    }
    let margin = ev.margin();
    if margin < MIN_MARGIN {
        return Err(IsoError::Indeterminate { margin });
    }
    let all_unit = ev.values().all(|z| is_unit(z, tol));
    let class = if ev.is_diagonalizable() {
        if all_unit {
            IsoClass::Elliptic { boundary: boundary_fixed(&a, j, &ev, tol)? }
        } else {
            let units: usize = ev.clusters.iter().filter(|c| is_unit(c.value, tol)).map(|c| c.algebraic).sum();
            if units + 2 != a.n() {
                return Err(IsoError::Spectrum(format!(
                    "{units} unit eigenvalues in dimension {}",
                    a.n()
                )));
            }
            IsoClass::Loxodromic
        }
    } else {
        if !all_unit {
            return Err(IsoError::Spectrum("non-diagonalizable with non-unit eigenvalues".into()));
        }
        IsoClass::Parabolic(subtype_from(&a, &ev, tol)?)
    };
    Ok(Classification { class, eigen: ev, form_defect: defect })
}

/// Refines a parabolic `A` into 2-step unipotent, 3-step unipotent or
/// ellipto-parabolic.
pub fn parabolic_subtype(a: &CMat, tol: f64) -> Result<ParabolicKind, IsoError> {
    let a = normalize(a)?;
    let ev = eigen(&a, tol)?;
    if ev.is_diagonalizable() {
        return Err(IsoError::NotParabolic);
    }
    subtype_from(&a, &ev, tol)
}

fn subtype_from(a: &CMat, ev: &EigenData, tol: f64) -> Result<ParabolicKind, IsoError> {
    if ev.clusters.len() > 1 {
        return Ok(ParabolicKind::EllipticParabolic);
    }
    let lambda = ev.clusters[0].value;
    let b = a.scale(&lambda.inv()).try_sub(&CMat::identity(a.n()))?;
    let nb = b.max_abs().max(1.0);
    let b2 = b.try_mul(&b)?;
    if b2.max_abs() <= tol * nb * nb {
        return Ok(ParabolicKind::UnipotentStep2);
    }
    let b3 = b2.try_mul(&b)?;
    if b3.max_abs() <= tol * nb * nb * nb {
        return Ok(ParabolicKind::UnipotentStep3);
    }
    Err(IsoError::Indeterminate { margin: b3.max_abs() / (tol * nb.powi(3)) })
}

/// Whether an elliptic `A` fixes a boundary point, that is, has a null
/// eigenvector for `J`.
///
/// An eigenspace contains a null vector exactly when the form restricted to
/// it is not definite, so each eigenspace is tested through its restricted
/// Gram matrix.
pub fn elliptic_boundary(a: &CMat, j: &HermForm<CScalar>, tol: f64) -> Result<bool, IsoError> {
    let a = normalize(a)?;
    let ev = eigen(&a, tol)?;
    boundary_fixed(&a, j, &ev, tol)
}

fn boundary_fixed(a: &CMat, j: &HermForm<CScalar>, ev: &EigenData, tol: f64) -> Result<bool, IsoError> {
    let threshold = tol * singular_values(a)?[0];
    let k = j.matrix();
    let n = a.n();
    let kscale = k.max_abs().max(f64::MIN_POSITIVE);
    for c in &ev.clusters {
        let basis = null_space(&shifted(a, c.value), threshold.max(f64::MIN_POSITIVE))?;
        if basis.is_empty() {
            continue;
        }
        let m = basis.len();
        let gram = CMat::from_fn(m, |p, q| {
            let (x, y) = (&basis[p], &basis[q]);
            let mut acc = CScalar::new(0.0, 0.0);
            for r in 0..n {
                for s in 0..n {
                    acc += x[r].conj() * k.get(r, s) * y[s];
                }
            }
            acc
        });
        let gram = HermForm::numeric(CMat::from_fn(m, |p, q| (gram.get(p, q) + gram.get(q, p).conj()) * 0.5))?;
        let eigs = herm_eigenvalues(&gram);
        let lo = eigs[0] / kscale;
        let hi = eigs[m - 1] / kscale;
        if lo <= tol && hi >= -tol {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> CScalar {
        CScalar::new(re, im)
    }

    /// Siegel form of signature (3,1) in dimension 4.
    fn siegel4() -> HermForm<CScalar> {
        HermForm::numeric(CMat::from_real(&[&[0.0, 0.0, 0.0, 1.0], &[0.0, 1.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0], &[1.0, 0.0, 0.0, 0.0]]).unwrap()).unwrap()
    }

    #[test]
    fn dilation_loxodromic() {
        let d = CMat::diag(vec![c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.5, 0.0)]);
        assert_eq!(classify(&d, &siegel4(), 1e-9).unwrap(), IsoClass::Loxodromic);
    }

    #[test]
    fn scalar_is_identity() {
        let a = CMat::identity(4).scale(&c(0.0, 1.0));
        assert_eq!(classify(&a, &siegel4(), 1e-9).unwrap(), IsoClass::Identity);
    }

    #[test]
    fn rotation_boundary_elliptic() {
        let a = CMat::diag(vec![c(1.0, 0.0), c(0.6, 0.8), c(1.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(classify(&a, &siegel4(), 1e-9).unwrap(), IsoClass::Elliptic { boundary: true });
    }

    #[test]
    fn non_preserving_rejected() {
        let a = CMat::diag(vec![c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(classify(&a, &siegel4(), 1e-9), Err(IsoError::FormDefect { .. })));
    }
}
