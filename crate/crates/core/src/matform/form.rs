use std::fmt;

use nalgebra::SymmetricEigen;
use serde::{Serialize, Serializer};

use super::{CMat, Mat, MatError};
use crate::scalars::{Angle, CScalar, EvalUnit, Ring};

/// Hermitian relative tolerance for numeric forms.
const HERMITIAN_TOL: f64 = 1e-12;

/// A Hermitian matrix `J` (`J* = J`), checked at construction.
#[derive(Clone, PartialEq)]
pub struct HermForm<T> {
    j: Mat<T>,
}

impl<T: Ring> HermForm<T> {
    /// Exact check `J* = J`.
    pub fn exact(j: Mat<T>) -> Result<Self, MatError> {
        if j.adjoint().try_sub(&j)?.is_zero() {
            Ok(HermForm { j })
        } else {
            Err(MatError::NotHermitian(f64::NAN))
        }
    }

    pub fn matrix(&self) -> &Mat<T> {
        &self.j
    }

    pub fn n(&self) -> usize {
        self.j.n()
    }
}

impl HermForm<CScalar> {
    /// Numeric check `|J* - J| <= 1e-12 * max(1, |J|)` entrywise.
    pub fn numeric(j: CMat) -> Result<Self, MatError> {
        if !j.is_finite() {
            return Err(MatError::NonFinite);
        }
        let defect = j.adjoint().max_abs_diff(&j)?;
        if defect <= HERMITIAN_TOL * j.max_abs().max(1.0) {
            Ok(HermForm { j })
        } else {
            Err(MatError::NotHermitian(defect))
        }
    }
}

impl<T: Ring + EvalUnit> HermForm<T> {
    pub fn eval_unit(&self, alpha: &Angle) -> Result<HermForm<CScalar>, MatError> {
        HermForm::numeric(self.j.eval_unit(alpha))
    }
}

impl<T: fmt::Debug> fmt::Debug for HermForm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("HermForm").field(&self.j).finish()
    }
}

/// Which adjoint the form is invariant under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormConvention {
    /// `g* J g = J`.
    ConjTranspose,
    /// `g^T J conj(g) = J`.
    TransposeConj,
}

/// Defect matrix of the invariance condition.
pub fn form_defect_matrix<T: Ring>(g: &Mat<T>, j: &HermForm<T>, conv: FormConvention) -> Result<Mat<T>, MatError> {
    let lhs = match conv {
        FormConvention::ConjTranspose => g.adjoint().try_mul(&j.j)?.try_mul(g)?,
        FormConvention::TransposeConj => g.transpose().try_mul(&j.j)?.try_mul(&g.star())?,
    };
    lhs.try_sub(&j.j)
}

/// Largest entry of the defect matrix.
pub fn form_defect(g: &CMat, j: &HermForm<CScalar>, conv: FormConvention) -> Result<f64, MatError> {
    Ok(form_defect_matrix(g, j, conv)?.max_abs())
}

/// Whether every defect entry vanishes exactly.
pub fn preserves_form_exact<T: Ring>(g: &Mat<T>, j: &HermForm<T>, conv: FormConvention) -> Result<bool, MatError> {
    Ok(form_defect_matrix(g, j, conv)?.is_zero())
}

/// Inertia of a Hermitian form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    pub plus: usize,
    pub minus: usize,
    pub zero: usize,
}

impl Signature {
    pub fn new(plus: usize, minus: usize, zero: usize) -> Self {
        Signature { plus, minus, zero }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.plus, self.minus, self.zero)
    }
}

impl Serialize for Signature {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.plus, self.minus, self.zero].serialize(s)
    }
}

/// Eigenvalues of a Hermitian form, ascending.
pub fn herm_eigenvalues(j: &HermForm<CScalar>) -> Vec<f64> {
    let eig = SymmetricEigen::new(j.j.to_dmatrix());
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Counts eigenvalues above `tol`, below `-tol`, and in between.
pub fn herm_signature(j: &HermForm<CScalar>, tol: f64) -> Signature {
    herm_eigenvalues(j).into_iter().fold(Signature::new(0, 0, 0), |mut s, x| {
        if x > tol {
            s.plus += 1;
        } else if x < -tol {
            s.minus += 1;
        } else {
            s.zero += 1;
        }
        s
    })
}
