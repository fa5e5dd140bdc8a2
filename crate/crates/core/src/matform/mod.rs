//! Dense square matrices over any [`Ring`], Hermitian forms and spectra.

mod form;
mod numeric;

pub use form::{
    form_defect, form_defect_matrix, herm_eigenvalues, herm_signature, preserves_form_exact, FormConvention, HermForm,
    Signature,
};
pub(crate) use numeric::shifted;
pub use numeric::{eigen, eigenvalues, null_space, numerical_rank, singular_values, EigenCluster, EigenData, RankDecision};

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Index, Mul};

use nalgebra::DMatrix;
use thiserror::Error;

use crate::scalars::{Angle, CScalar, EvalUnit, Ring};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatError {
    #[error("matrix must have dimension at least 1")]
    Empty,
    #[error("row {row} has {len} entries, expected {expected}")]
    Ragged { row: usize, len: usize, expected: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not invertible over its ring")]
    Singular,
    #[error("form is not hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("numeric decomposition failed: {0}")]
    Decomposition(&'static str),
    #[error("matrix has non-finite entries")]
    NonFinite,
}

/// Square matrix, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat<T> {
    n: usize,
    entries: Vec<T>,
}

/// Numeric matrix.
pub type CMat = Mat<CScalar>;

impl<T: Clone> Mat<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, MatError> {
        let n = rows.len();
        if n == 0 {
            return Err(MatError::Empty);
        }
        let mut entries = Vec::with_capacity(n * n);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != n {
                return Err(MatError::Ragged { row, len: r.len(), expected: n });
            }
            entries.extend(r);
        }
        Ok(Mat { n, entries })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(n > 0, "matrix dimension must be positive");
        let entries = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Mat { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.entries[i * self.n + j] = v;
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.entries.chunks(self.n)
    }

    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.entries.iter()
    }

    pub fn map<U: Clone>(&self, f: impl FnMut(&T) -> U) -> Mat<U> {
        Mat { n: self.n, entries: self.entries.iter().map(f).collect() }
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.n, |i, j| self.get(j, i).clone())
    }

    /// The submatrix without row `r` and column `c`.
    pub fn minor(&self, r: usize, c: usize) -> Self {
        let m = self.n - 1;
        Mat::from_fn(m, |i, j| {
            let ii = if i < r { i } else { i + 1 };
            let jj = if j < c { j } else { j + 1 };
            self.get(ii, jj).clone()
        })
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.entries[i * self.n + j]
    }
}

impl<T: Ring> Mat<T> {
    pub fn zeros(n: usize) -> Self {
        Mat::from_fn(n, |_, _| T::zero())
    }

    pub fn identity(n: usize) -> Self {
        Mat::from_fn(n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn diag(d: Vec<T>) -> Self {
        let n = d.len();
        Mat::from_fn(n, |i, j| if i == j { d[i].clone() } else { T::zero() })
    }

    pub fn from_ints(rows: &[&[i64]]) -> Result<Self, MatError> {
        Mat::from_rows(rows.iter().map(|r| r.iter().map(|&x| T::from_int(x)).collect()).collect())
    }

    fn check_dim(&self, rhs: &Self) -> Result<(), MatError> {
        if self.n == rhs.n {
            Ok(())
        } else {
            Err(MatError::DimensionMismatch { left: self.n, right: rhs.n })
        }
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self, MatError> {
        self.check_dim(rhs)?;
        let n = self.n;
        Ok(Mat::from_fn(n, |i, j| {
            (0..n).fold(T::zero(), |acc, k| acc.add_ref(&self.get(i, k).mul_ref(rhs.get(k, j))))
        }))
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self, MatError> {
        self.check_dim(rhs)?;
        Ok(Mat {
            n: self.n,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a.add_ref(b)).collect(),
        })
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self, MatError> {
        self.check_dim(rhs)?;
        Ok(Mat {
            n: self.n,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a.sub_ref(b)).collect(),
        })
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|x| c.mul_ref(x))
    }

    /// Entrywise involution (complex conjugation, or `u ↦ u^-1`).
    pub fn star(&self) -> Self {
        self.map(Ring::star)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        self.transpose().star()
    }

    pub fn trace(&self) -> T {
        (0..self.n).fold(T::zero(), |acc, i| acc.add_ref(self.get(i, i)))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Ring::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.rows()
            .enumerate()
            .all(|(i, r)| r.iter().enumerate().all(|(j, x)| if i == j { x.is_one() } else { x.is_zero() }))
    }

    /// `Some(c)` when the matrix is `c * I`.
    pub fn scalar_multiple_of_identity(&self) -> Option<T> {
        let c = self.get(0, 0).clone();
        let ok = self.rows().enumerate().all(|(i, r)| {
            r.iter()
                .enumerate()
                .all(|(j, x)| if i == j { x.sub_ref(&c).is_zero() } else { x.is_zero() })
        });
        ok.then_some(c)
    }

    /// Division-free determinant: expansion over column subsets.
    pub fn exact_det(&self) -> T {
        let n = self.n;
        assert!(n < 24, "exact determinant limited to small matrices");
        // level k: determinant of rows 0..k restricted to column set S (|S| = k)
        let mut level: BTreeMap<u32, T> = BTreeMap::from([(0u32, T::one())]);
        for k in 0..n {
            let mut next: BTreeMap<u32, T> = BTreeMap::new();
            for (&set, val) in &level {
                if val.is_zero() {
                    continue;
                }
                for j in 0..n {
                    if set & (1 << j) != 0 || self.get(k, j).is_zero() {
                        continue;
                    }
                    let greater = (set >> (j + 1)).count_ones();
                    let mut term = val.mul_ref(self.get(k, j));
                    if greater % 2 == 1 {
                        term = term.neg_ref();
                    }
                    let slot = next.entry(set | (1 << j)).or_insert_with(T::zero);
                    *slot = slot.add_ref(&term);
                }
            }
            level = next;
        }
        level.remove(&((1u32 << n) - 1)).unwrap_or_else(T::zero)
    }

    pub fn adjugate(&self) -> Self {
        let n = self.n;
        if n == 1 {
            return Mat::identity(1);
        }
        Mat::from_fn(n, |i, j| {
            let c = self.minor(j, i).exact_det();
            if (i + j) % 2 == 1 {
                c.neg_ref()
            } else {
                c
            }
        })
    }

    /// Inverse as adjugate over determinant; needs the determinant to be a
    /// unit of the ring.
    pub fn exact_inverse(&self) -> Result<Self, MatError> {
        let inv = self.exact_det().unit_inverse().ok_or(MatError::Singular)?;
        Ok(self.adjugate().scale(&inv))
    }

    /// Exact test of `self * rhs == rhs * self`.
    pub fn commutes_with(&self, rhs: &Self) -> Result<bool, MatError> {
        Ok(self.try_mul(rhs)?.try_sub(&rhs.try_mul(self)?)?.is_zero())
    }
}

/// Determinant and inverse, exact by default and LU-based for floats.
pub trait Backend: Ring {
    /// Whether values are exact (no rounding).
    const EXACT: bool = true;

    fn mat_det(a: &Mat<Self>) -> Self {
        a.exact_det()
    }
    fn mat_inverse(a: &Mat<Self>) -> Result<Mat<Self>, MatError> {
        a.exact_inverse()
    }
    /// Largest entry modulus, when the backend has one.
    fn size(_a: &Mat<Self>) -> Option<f64> {
        None
    }
    /// Zero test: exact, or `max |a_ij| <= tol` for floats.
    fn negligible(a: &Mat<Self>, _tol: f64) -> bool {
        a.is_zero()
    }
}

impl Backend for crate::scalars::LaurentPoly {}
impl Backend for crate::scalars::ExtScalar {}

impl Backend for CScalar {
    const EXACT: bool = false;

    fn size(a: &CMat) -> Option<f64> {
        Some(a.max_abs())
    }
    fn negligible(a: &CMat, tol: f64) -> bool {
        a.max_abs() <= tol
    }
    fn mat_det(a: &CMat) -> CScalar {
        a.to_dmatrix().lu().determinant()
    }
    fn mat_inverse(a: &CMat) -> Result<CMat, MatError> {
        let inv = a.to_dmatrix().lu().try_inverse().ok_or(MatError::Singular)?;
        CMat::from_dmatrix(&inv)
    }
}

impl<T: Backend> Mat<T> {
    pub fn det(&self) -> T {
        T::mat_det(self)
    }

    pub fn inverse(&self) -> Result<Self, MatError> {
        T::mat_inverse(self)
    }

    /// `self^k`, negative powers through the inverse.
    pub fn pow(&self, k: i64) -> Result<Self, MatError> {
        let base = if k < 0 { self.inverse()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Mat::identity(self.n);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.try_mul(&sq)?;
            }
            e >>= 1;
            if e > 0 {
                sq = sq.try_mul(&sq)?;
            }
        }
        Ok(acc)
    }
}

impl<T: EvalUnit + Clone> Mat<T> {
    /// Entrywise substitution `u = e^{i alpha}`.
    pub fn eval_unit(&self, alpha: &Angle) -> CMat {
        self.map(|x| x.eval_unit(alpha))
    }
}

impl CMat {
    pub fn from_dmatrix(m: &DMatrix<CScalar>) -> Result<Self, MatError> {
        if m.nrows() != m.ncols() {
            return Err(MatError::DimensionMismatch { left: m.nrows(), right: m.ncols() });
        }
        if m.nrows() == 0 {
            return Err(MatError::Empty);
        }
        Ok(Mat::from_fn(m.nrows(), |i, j| m[(i, j)]))
    }

    pub fn to_dmatrix(&self) -> DMatrix<CScalar> {
        DMatrix::from_fn(self.n, self.n, |i, j| *self.get(i, j))
    }

    pub fn from_real(rows: &[&[f64]]) -> Result<Self, MatError> {
        Mat::from_rows(rows.iter().map(|r| r.iter().map(|&x| CScalar::new(x, 0.0)).collect()).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry deviation from `other`.
    pub fn max_abs_diff(&self, other: &CMat) -> Result<f64, MatError> {
        Ok(self.try_sub(other)?.max_abs())
    }
}

impl<T: Ring> Mul for &Mat<T> {
    type Output = Mat<T>;
    /// Panics on dimension mismatch; see [`Mat::try_mul`].
    fn mul(self, rhs: &Mat<T>) -> Mat<T> {
        self.try_mul(rhs).expect("matrix dimension mismatch")
    }
}

impl<T: fmt::Display> fmt::Display for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.entries.chunks(self.n).enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let cells: Vec<String> = r.iter().map(ToString::to_string).collect();
            write!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

impl<T: fmt::Debug> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.chunks(self.n)).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::LaurentPoly;

    fn lp(terms: &[(i32, i64, i64)]) -> LaurentPoly {
        LaurentPoly::from_terms(terms)
    }

    #[test]
    fn identity_det() {
        assert!(Mat::<LaurentPoly>::identity(4).exact_det().is_one());
        let i = CMat::identity(4);
        assert!((i.det() - CScalar::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn det_matches_leibniz() {
        // Leibniz expansion over all permutations as an oracle.
        fn perms(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(n - 1) {
                for pos in 0..n {
                    let mut q = p.clone();
                    q.insert(pos, n - 1);
                    out.push(q);
                }
            }
            out
        }
        let m = Mat::<LaurentPoly>::from_fn(4, |i, j| lp(&[((i as i32) - (j as i32), (i * 3 + j) as i64 + 1, 1), (1, (i ^ j) as i64, 2)]));
        let mut leib = LaurentPoly::zero();
        for p in perms(4) {
            let inv = (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b))).filter(|&(a, b)| p[a] > p[b]).count();
            let mut term = LaurentPoly::constant(if inv % 2 == 0 { 1 } else { -1 });
            for (i, &pi) in p.iter().enumerate() {
                term = &term * m.get(i, pi);
            }
            leib = &leib + &term;
        }
        assert_eq!(m.exact_det(), leib);
    }

    #[test]
    fn exact_inverse_roundtrip() {
        let u = LaurentPoly::u();
        let z = LaurentPoly::zero;
        let o = || LaurentPoly::constant(1);
        let m = Mat::from_rows(vec![
            vec![o(), z(), o(), &u.scale(&num_rational::BigRational::new(1.into(), 2.into())) - &o()],
            vec![z(), o(), o(), u.clone()],
            vec![z(), z(), u.clone(), o()],
            vec![z(), z(), z(), o()],
        ])
        .unwrap();
        let inv = m.inverse().unwrap();
        assert!(m.try_mul(&inv).unwrap().is_identity());
        assert!(m.pow(-3).unwrap().try_mul(&m.pow(3).unwrap()).unwrap().is_identity());
        // 1 + u is not a unit of Q[u, u^-1]
        let s = Mat::diag(vec![&o() + &u, o()]);
        assert_eq!(s.inverse(), Err(MatError::Singular));
    }

    #[test]
    fn ragged_rejected() {
        let r = Mat::<CScalar>::from_rows(vec![vec![CScalar::new(1.0, 0.0)], vec![]]);
        assert!(matches!(r, Err(MatError::Ragged { .. })));
        assert_eq!(Mat::<CScalar>::from_rows(vec![]), Err(MatError::Empty));
    }

    #[test]
    fn numeric_inverse_and_det() {
        let m = CMat::from_real(&[&[2.0, 1.0], &[1.0, 1.0]]).unwrap();
        assert!((m.det().re - 1.0).abs() < 1e-14);
        let p = m.try_mul(&m.inverse().unwrap()).unwrap();
        assert!(p.max_abs_diff(&CMat::identity(2)).unwrap() < 1e-14);
    }
}
