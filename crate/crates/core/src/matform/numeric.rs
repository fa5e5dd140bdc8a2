use nalgebra::{Schur, SVD};
use serde::Serialize;

use super::{CMat, MatError};
use crate::scalars::CScalar;

const MAX_ITER: usize = 10_000;

/// Eigenvalues closer than this (relative) are always merged.
const MERGE_RADIUS: f64 = 1e-7;

/// Singular values, descending.
pub fn singular_values(a: &CMat) -> Result<Vec<f64>, MatError> {
    if !a.is_finite() {
        return Err(MatError::NonFinite);
    }
    let svd = SVD::try_new(a.to_dmatrix(), false, false, f64::EPSILON, MAX_ITER)
        .ok_or(MatError::Decomposition("singular value iteration did not converge"))?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// Numerical rank at an absolute threshold, with the distance of the
/// closest singular value to that threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankDecision {
    pub rank: usize,
    pub threshold: f64,
    /// `min_i max(s_i, thr) / min(s_i, thr)`; infinite when every singular
    /// value is exactly zero or the threshold is zero.
    pub margin: f64,
}

impl RankDecision {
    pub fn from_singular_values(s: &[f64], threshold: f64) -> Self {
        let rank = s.iter().filter(|&&x| x > threshold).count();
        let margin = s
            .iter()
            .map(|&x| {
                let (lo, hi) = if x < threshold { (x, threshold) } else { (threshold, x) };
                if lo == 0.0 {
                    f64::INFINITY
                } else {
                    hi / lo
                }
            })
            .fold(f64::INFINITY, f64::min);
        RankDecision { rank, threshold, margin }
    }
}

/// Rank of `a` at threshold `tol * sigma_max(a)`.
pub fn numerical_rank(a: &CMat, tol: f64) -> Result<RankDecision, MatError> {
    let s = singular_values(a)?;
    Ok(RankDecision::from_singular_values(&s, tol * s[0]))
}

/// Orthonormal basis of the numerical kernel of `a` at an absolute threshold.
pub fn null_space(a: &CMat, threshold: f64) -> Result<Vec<Vec<CScalar>>, MatError> {
    if !a.is_finite() {
        return Err(MatError::NonFinite);
    }
    let svd = SVD::try_new(a.to_dmatrix(), false, true, f64::EPSILON, MAX_ITER)
        .ok_or(MatError::Decomposition("singular value iteration did not converge"))?;
    let v_t = svd.v_t.ok_or(MatError::Decomposition("missing right singular vectors"))?;
    Ok(svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= threshold)
        .map(|(i, _)| v_t.row(i).iter().map(|z| z.conj()).collect())
        .collect())
}

/// Eigenvalues from the complex Schur form, unsorted.
pub fn eigenvalues(a: &CMat) -> Result<Vec<CScalar>, MatError> {
    if !a.is_finite() {
        return Err(MatError::NonFinite);
    }
    let schur = Schur::try_new(a.to_dmatrix(), f64::EPSILON, MAX_ITER)
        .ok_or(MatError::Decomposition("Schur iteration did not converge"))?;
    let ev = schur
        .eigenvalues()
        .ok_or(MatError::Decomposition("Schur form is not triangular"))?;
    Ok(ev.iter().copied().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenCluster {
    pub value: CScalar,
    pub algebraic: usize,
    pub geometric: usize,
    /// Margin of the rank decision for `A - value I`.
    pub rank_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenData {
    pub clusters: Vec<EigenCluster>,
    /// Set when a geometric multiplicity had to be clamped into
    /// `[1, algebraic]`.
    pub degenerate: bool,
}

impl EigenData {
    pub fn is_diagonalizable(&self) -> bool {
        self.clusters.iter().all(|c| c.geometric == c.algebraic)
    }

    /// Smallest rank margin over all clusters.
    pub fn margin(&self) -> f64 {
        self.clusters.iter().map(|c| c.rank_margin).fold(f64::INFINITY, f64::min)
    }

    pub fn values(&self) -> impl Iterator<Item = CScalar> + '_ {
        self.clusters.iter().map(|c| c.value)
    }
}

struct Cluster {
    members: Vec<CScalar>,
}

impl Cluster {
    fn centroid(&self) -> CScalar {
        self.members.iter().sum::<CScalar>() / self.members.len() as f64
    }
}

pub(crate) fn shifted(a: &CMat, c: CScalar) -> CMat {
    let mut m = a.clone();
    for i in 0..a.n() {
        m.set(i, i, a.get(i, i) - c);
    }
    m
}

/// Clusters the spectrum and measures multiplicities.
///
/// Two clusters merge when their centroids are within relative `1e-7`, or
/// when `A - cI` is numerically singular at `tol * sigma_max(A)` for the
/// centroid `c` of their union. The second rule catches eigenvalues of a
/// Jordan block, which floating point splits by about `eps^(1/k)`.
/// Geometric multiplicity is `n - rank(A - cI)` at the same threshold.
pub fn eigen(a: &CMat, tol: f64) -> Result<EigenData, MatError> {
    let n = a.n();
    let scale = singular_values(a)?[0].max(f64::MIN_POSITIVE);
    let threshold = tol * scale;
    let mut clusters: Vec<Cluster> = eigenvalues(a)?.into_iter().map(|z| Cluster { members: vec![z] }).collect();

    loop {
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                pairs.push(((clusters[i].centroid() - clusters[j].centroid()).norm(), i, j));
            }
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged = None;
        for (dist, i, j) in pairs {
            let (ci, cj) = (clusters[i].centroid(), clusters[j].centroid());
            let close = dist <= MERGE_RADIUS * ci.norm().max(cj.norm()).max(1.0);
            let union: Vec<CScalar> = clusters[i].members.iter().chain(&clusters[j].members).copied().collect();
            let joint = Cluster { members: union };
            if close || singular_values(&shifted(a, joint.centroid()))?[n - 1] <= threshold {
                merged = Some((i, j, joint));
                break;
            }
        }
        match merged {
            Some((i, j, joint)) => {
                clusters.remove(j);
                clusters[i] = joint;
            }
            None => break,
        }
    }

    let mut degenerate = false;
    let mut out = Vec::with_capacity(clusters.len());
    for c in &clusters {
        let value = c.centroid();
        let algebraic = c.members.len();
        let s = singular_values(&shifted(a, value))?;
        let rd = RankDecision::from_singular_values(&s, threshold);
        let raw = n - rd.rank;
        let geometric = raw.clamp(1, algebraic);
        degenerate |= geometric != raw;
        out.push(EigenCluster { value, algebraic, geometric, rank_margin: rd.margin });
    }
    out.sort_by(|x, y| {
        x.value
            .arg()
            .total_cmp(&y.value.arg())
            .then(x.value.norm().total_cmp(&y.value.norm()))
    });
    Ok(EigenData { clusters: out, degenerate })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_one_cluster() {
        let e = eigen(&CMat::identity(4), 1e-9).unwrap();
        assert_eq!(e.clusters.len(), 1);
        assert_eq!((e.clusters[0].algebraic, e.clusters[0].geometric), (4, 4));
        assert!(e.is_diagonalizable());
    }

    #[test]
    fn jordan_block_detected() {
        // 3x3 Jordan block at 1 plus a simple eigenvalue 2
        let m = CMat::from_real(&[
            &[1.0, 1.0, 0.0, 0.0],
            &[0.0, 1.0, 1.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, 2.0],
        ])
        .unwrap();
        // hide the triangular structure
        let p = CMat::from_real(&[&[1.0, 2.0, 0.0, 1.0], &[0.0, 1.0, 3.0, 0.0], &[1.0, 0.0, 1.0, 0.0], &[0.0, 1.0, 0.0, 1.0]]).unwrap();
        let a = p.try_mul(&m).unwrap().try_mul(&p.inverse().unwrap()).unwrap();
        let e = eigen(&a, 1e-9).unwrap();
        assert_eq!(e.clusters.len(), 2);
        let one = e.clusters.iter().find(|c| (c.value.re - 1.0).abs() < 1e-4).unwrap();
        assert_eq!((one.algebraic, one.geometric), (3, 1));
        assert!(!e.is_diagonalizable());
        assert!(e.margin() > 10.0);
    }

    #[test]
    fn rank_margin() {
        let rd = RankDecision::from_singular_values(&[1.0, 1e-3, 0.0], 1e-9);
        assert_eq!(rd.rank, 2);
        assert!((rd.margin - 1e6).abs() < 1e-3);
    }
}
