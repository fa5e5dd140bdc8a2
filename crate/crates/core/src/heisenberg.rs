//! Boundary geometry of the Siegel model.
//!
//! The form is `H = antidiag(1, .., 1)` with an identity middle block, so
//! the stabilizer of `p_inf = [1, 0, .., 0]` is upper triangular. A boundary
//! point `(Z, t)` lifts to `[(-|Z|^2 + i t) / 2, Z, 1]`, and the punctured
//! boundary is the Heisenberg group with
//! `(Z1, t1)(Z2, t2) = (Z1 + Z2, t1 + t2 + 2 Im <Z1, Z2>)`,
//! where `<Z, W> = sum Z_k conj(W_k)`.
//!
//! For the bent cusp group `<T, U>` with `T = T_(a,0)` and
//! `U = Diag(1, 1, u, 1) T_((b1, b2), 0)`, `U` rotates the `z2` coordinate
//! about `c_u = u b2 / (1 - u)`. Shifted coordinates use `z2' = z2 - c_u`.
//! In this normalization the vertical coordinate evolves as
//!
//! `v_{m,n} = v - 2 (m a + n b1) Im z1 - 2 n b2 Im c_u - 2 b2 Im(z2' (1 - u^n) / (1 - u))`
//!
//! which holds for all integers `m`, `n`.

use std::io::Write;

use num_rational::Rational64;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::matform::{form_defect, CMat, FormConvention, HermForm, Mat, MatError};
use crate::scalars::{is_squarefree, Angle, CScalar, Ring};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HeisError {
    #[error("Heisenberg points of different lengths {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("matrix does not fix the point at infinity")]
    NotFixingInfinity,
    #[error("rotation block is not unitary (defect {0:e})")]
    NotUnitary(f64),
    #[error("dilation factor must be positive, got {0}")]
    NonPositiveDilation(f64),
    #[error("cusp parameters need a != 0 and b2 != 0")]
    DegenerateCusp,
    #[error("the deformation parameter u = 1 has no rotation center")]
    Undeformed,
    #[error("translation part must be nonzero")]
    ZeroTranslation,
    #[error("first generator must be a pure translation (angle 0)")]
    RotatingFirstGenerator,
    #[error("rationality of {0} is undecidable from the inputs; use the sampling probe")]
    Undecidable(&'static str),
    #[error("radical {0} is not squarefree")]
    NotSquarefree(u32),
    #[error("word radius {0} exceeds the limit {MAX_RADIUS}")]
    RadiusTooLarge(u32),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error("csv output failed: {0}")]
    Csv(String),
}

/// Largest word radius accepted by orbit enumeration.
pub const MAX_RADIUS: u32 = 50;

fn c(re: f64, im: f64) -> CScalar {
    CScalar::new(re, im)
}

/// `<Z, W> = sum Z_k conj(W_k)`.
fn herm_dot(z: &[CScalar], w: &[CScalar]) -> CScalar {
    z.iter().zip(w).map(|(a, b)| a * b.conj()).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeisPoint {
    pub z: Vec<CScalar>,
    pub t: f64,
}

impl HeisPoint {
    pub fn new(z: Vec<CScalar>, t: f64) -> Self {
        HeisPoint { z, t }
    }

    pub fn origin(k: usize) -> Self {
        HeisPoint { z: vec![c(0.0, 0.0); k], t: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn inverse(&self) -> Self {
        HeisPoint { z: self.z.iter().map(|x| -x).collect(), t: -self.t }
    }

    /// Standard lift `[(-|Z|^2 + i t) / 2, Z, 1]`.
    pub fn lift(&self) -> Vec<CScalar> {
        let norm2: f64 = self.z.iter().map(|x| x.norm_sqr()).sum();
        let mut v = Vec::with_capacity(self.z.len() + 2);
        v.push(c(-norm2 / 2.0, self.t / 2.0));
        v.extend(&self.z);
        v.push(c(1.0, 0.0));
        v
    }

    /// Inverse of [`HeisPoint::lift`] on a projective vector with nonzero
    /// last coordinate.
    pub fn from_lift(v: &[CScalar]) -> Self {
        let last = v[v.len() - 1];
        let z = v[1..v.len() - 1].iter().map(|x| x / last).collect();
        HeisPoint { z, t: 2.0 * (v[0] / last).im }
    }

    /// Left-invariant box gauge `max(|dZ|, |dt|^(1/2))` of `self^-1 q`.
    pub fn box_distance(&self, q: &HeisPoint) -> f64 {
        let dz: f64 = self.z.iter().zip(&q.z).map(|(a, b)| (b - a).norm_sqr()).sum::<f64>().sqrt();
        let dt = q.t - self.t - 2.0 * herm_dot(&self.z, &q.z).im;
        dz.max(dt.abs().sqrt())
    }
}

pub fn heis_mul(p: &HeisPoint, q: &HeisPoint) -> Result<HeisPoint, HeisError> {
    if p.dim() != q.dim() {
        return Err(HeisError::LengthMismatch(p.dim(), q.dim()));
    }
    Ok(HeisPoint {
        z: p.z.iter().zip(&q.z).map(|(a, b)| a + b).collect(),
        t: p.t + q.t + 2.0 * herm_dot(&p.z, &q.z).im,
    })
}

/// Siegel form of size `n`.
pub fn siegel_form<T: Ring>(n: usize) -> HermForm<T> {
    let m = Mat::from_fn(n, |i, j| {
        let anti = (i == 0 && j == n - 1) || (i == n - 1 && j == 0);
        let mid = i == j && i > 0 && i < n - 1;
        if anti || mid {
            T::one()
        } else {
            T::zero()
        }
    });
    HermForm::exact(m).expect("Siegel form is hermitian")
}

/// Generators of the stabilizer of `p_inf`.
#[derive(Debug, Clone, PartialEq)]
pub enum StabKind {
    Translation(HeisPoint),
    Rotation(CMat),
    /// Dilation by `r` on `C^k x R`.
    Dilation { k: usize, r: f64 },
}

pub fn stab_matrix(kind: &StabKind) -> Result<CMat, HeisError> {
    match kind {
        StabKind::Translation(p) => {
            let k = p.dim();
            let n = k + 2;
            let norm2: f64 = p.z.iter().map(|x| x.norm_sqr()).sum();
            let mut m = CMat::identity(n);
            for (i, zi) in p.z.iter().enumerate() {
                m.set(0, i + 1, -zi.conj());
                m.set(i + 1, n - 1, *zi);
            }
            m.set(0, n - 1, c(-norm2 / 2.0, p.t / 2.0));
            Ok(m)
        }
        StabKind::Rotation(u) => {
            let k = u.n();
            let defect = u.adjoint().try_mul(u)?.max_abs_diff(&CMat::identity(k))?;
            if !(defect <= 1e-12) {
                return Err(HeisError::NotUnitary(defect));
            }
            Ok(CMat::from_fn(k + 2, |i, j| match (i, j) {
                (0, 0) => c(1.0, 0.0),
                (i, j) if i == k + 1 && j == k + 1 => c(1.0, 0.0),
                (i, j) if (1..=k).contains(&i) && (1..=k).contains(&j) => *u.get(i - 1, j - 1),
                _ => c(0.0, 0.0),
            }))
        }
        StabKind::Dilation { k, r } => dilation(k + 2, *r),
    }
}

/// Dilation of the given size.
pub fn dilation(n: usize, r: f64) -> Result<CMat, HeisError> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(HeisError::NonPositiveDilation(r));
    }
    let mut m = CMat::identity(n);
    m.set(0, 0, c(r, 0.0));
    m.set(n - 1, n - 1, c(1.0 / r, 0.0));
    Ok(m)
}

fn apply(g: &CMat, v: &[CScalar]) -> Vec<CScalar> {
    let n = g.n();
    let w: Vec<CScalar> = (0..n).map(|i| (0..n).map(|j| g.get(i, j) * v[j]).sum()).collect();
    let last = w[n - 1];
    w.into_iter().map(|x| x / last).collect()
}

fn fixes_infinity(g: &CMat) -> bool {
    let scale = g.max_abs().max(f64::MIN_POSITIVE);
    g.get(0, 0).norm() > 0.0 && (1..g.n()).all(|i| g.get(i, 0).norm() <= 1e-12 * scale)
}

/// Projective action of a stabilizer element on the punctured boundary.
pub fn boundary_action(g: &CMat, p: &HeisPoint) -> Result<HeisPoint, HeisError> {
    if p.dim() + 2 != g.n() {
        return Err(HeisError::LengthMismatch(p.dim() + 2, g.n()));
    }
    if !fixes_infinity(g) {
        return Err(HeisError::NotFixingInfinity);
    }
    Ok(HeisPoint::from_lift(&apply(g, &p.lift())))
}

/// Cusp data `T = T_(a,0)`, `U = Z3(u) T_((b1,b2),0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CuspParams {
    pub a: f64,
    pub b1: f64,
    pub b2: f64,
    pub u: Angle,
}

impl CuspParams {
    pub fn new(a: f64, b1: f64, b2: f64, u: Angle) -> Result<Self, HeisError> {
        if a == 0.0 || b2 == 0.0 || !a.is_finite() || !b1.is_finite() || !b2.is_finite() {
            return Err(HeisError::DegenerateCusp);
        }
        Ok(CuspParams { a, b1, b2, u })
    }

    pub fn is_orthogonal(&self) -> bool {
        self.b1 == 0.0
    }

    /// Rotation center `c_u = u b2 / (1 - u)` of `U` on the `z2` line.
    pub fn center(&self) -> Result<CScalar, HeisError> {
        if self.u.is_zero_mod_2pi() {
            return Err(HeisError::Undeformed);
        }
        let u = self.u.unit();
        Ok(u * self.b2 / (c(1.0, 0.0) - u))
    }

    pub fn t_matrix(&self) -> CMat {
        stab_matrix(&StabKind::Translation(HeisPoint::new(vec![c(self.a, 0.0), c(0.0, 0.0)], 0.0)))
            .expect("translation is always valid")
    }

    pub fn u_matrix(&self) -> CMat {
        let base = stab_matrix(&StabKind::Translation(HeisPoint::new(vec![c(self.b1, 0.0), c(self.b2, 0.0)], 0.0)))
            .expect("translation is always valid");
        let z3 = CMat::diag(vec![c(1.0, 0.0), c(1.0, 0.0), self.u.unit(), c(1.0, 0.0)]);
        z3.try_mul(&base).expect("both 4x4")
    }

    pub fn to_shifted(&self, p: &HeisPoint) -> Result<HeisPoint, HeisError> {
        let cu = self.center()?;
        Ok(HeisPoint::new(vec![p.z[0], p.z[1] - cu], p.t))
    }

    pub fn from_shifted(&self, p: &HeisPoint) -> Result<HeisPoint, HeisError> {
        let cu = self.center()?;
        Ok(HeisPoint::new(vec![p.z[0], p.z[1] + cu], p.t))
    }
}

/// Closed form of `T^m U^n p0`, in shifted coordinates.
pub fn orbit_point(params: &CuspParams, m: i64, n: i64, p0: &HeisPoint) -> Result<HeisPoint, HeisError> {
    if p0.dim() != 2 {
        return Err(HeisError::LengthMismatch(2, p0.dim()));
    }
    let cu = params.center()?;
    let u = params.u.unit();
    let un = params.u.unit_pow(n);
    let (z1, z2) = (p0.z[0], p0.z[1]);
    let shift = m as f64 * params.a + n as f64 * params.b1;
    let geom = (c(1.0, 0.0) - un) / (c(1.0, 0.0) - u);
    let v = p0.t - 2.0 * shift * z1.im - 2.0 * n as f64 * params.b2 * cu.im - 2.0 * params.b2 * (z2 * geom).im;
    Ok(HeisPoint::new(vec![z1 + shift, un * z2], v))
}

/// `T^m U^n p0` by explicit matrix action, raw coordinates.
pub fn orbit_point_matrix(params: &CuspParams, m: i64, n: i64, p0: &HeisPoint) -> Result<HeisPoint, HeisError> {
    let g = params.t_matrix().pow(m)?.try_mul(&params.u_matrix().pow(n)?)?;
    boundary_action(&g, p0)
}

/// `T^m U^n 0 = 0` only for `m = n = 0`, checked for `|m|, |n| <= r`.
pub fn faithfulness_witness(params: &CuspParams, r: i64) -> Result<bool, HeisError> {
    let origin = HeisPoint::origin(2);
    for m in -r..=r {
        for n in -r..=r {
            if (m, n) == (0, 0) {
                continue;
            }
            let p = orbit_point(params, m, n, &origin)?;
            if p.z.iter().all(|z| z.norm() <= 1e-12) && p.t.abs() <= 1e-12 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// One orbit point with its word exponents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitSample {
    pub m: i64,
    pub n: i64,
    pub point: HeisPoint,
}

/// Orbit `T^m U^n p0` for `|m|, |n| <= r` in lexicographic `(m, n)` order.
pub fn enumerate_orbit(t: &CMat, u: &CMat, p0: &HeisPoint, r: u32) -> Result<Vec<OrbitSample>, HeisError> {
    if r > MAX_RADIUS {
        return Err(HeisError::RadiusTooLarge(r));
    }
    for g in [t, u] {
        if g.n() != p0.dim() + 2 {
            return Err(HeisError::LengthMismatch(p0.dim() + 2, g.n()));
        }
        if !fixes_infinity(g) {
            return Err(HeisError::NotFixingInfinity);
        }
    }
    let r = r as i64;
    let (ti, ui) = (t.inverse()?, u.inverse()?);
    // U^n p0 for n in -r..=r
    let mut column = vec![p0.lift(); (2 * r + 1) as usize];
    for k in 1..=r as usize {
        column[r as usize + k] = apply(u, &column[r as usize + k - 1]);
        column[r as usize - k] = apply(&ui, &column[r as usize - k + 1]);
    }
    let mut grid = vec![Vec::new(); (2 * r + 1) as usize];
    grid[r as usize] = column.clone();
    for k in 1..=r as usize {
        grid[r as usize + k] = grid[r as usize + k - 1].iter().map(|v| apply(t, v)).collect();
        grid[r as usize - k] = grid[r as usize - k + 1].iter().map(|v| apply(&ti, v)).collect();
    }
    let mut out = Vec::with_capacity(grid.len() * grid.len());
    for (i, row) in grid.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out.push(OrbitSample { m: i as i64 - r, n: j as i64 - r, point: HeisPoint::from_lift(v) });
        }
    }
    Ok(out)
}

/// Smallest positive box distance between orbit points.
pub fn min_gap(points: &[HeisPoint]) -> f64 {
    let mut sorted: Vec<&HeisPoint> = points.iter().collect();
    let key = |p: &HeisPoint| p.z.first().map_or(0.0, |z| z.re);
    sorted.sort_by(|x, y| key(x).total_cmp(&key(y)));
    let mut best = f64::INFINITY;
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            if key(sorted[j]) - key(sorted[i]) >= best {
                break;
            }
            let d = sorted[i].box_distance(sorted[j]);
            if d > 1e-12 && d < best {
                best = d;
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub radius: u32,
    pub points: usize,
    pub gap: f64,
}

/// Minimum pairwise gap of the orbit of `p0` under `<t, u>` at word radius
/// `r`. A gap that stays bounded below as `r` grows suggests a discrete
/// orbit; it proves nothing.
pub fn orbit_gap_probe(t: &CMat, u: &CMat, p0: &HeisPoint, r: u32) -> Result<GapReport, HeisError> {
    let samples = enumerate_orbit(t, u, p0, r)?;
    let pts: Vec<HeisPoint> = samples.into_iter().map(|s| s.point).collect();
    Ok(GapReport { radius: r, points: pts.len(), gap: min_gap(&pts) })
}

/// CSV row: `m, n, Re z1, Im z1, Re z2, Im z2, v`.
///
/// Real boundary points `(x, y, w)` of the five-dimensional model are
/// written with `z1 = x`, `z2 = y + i w`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitRow {
    pub m: i64,
    pub n: i64,
    pub re_z1: f64,
    pub im_z1: f64,
    pub re_z2: f64,
    pub im_z2: f64,
    pub v: f64,
}

impl From<&OrbitSample> for OrbitRow {
    fn from(s: &OrbitSample) -> Self {
        let z = &s.point.z;
        let (z1, z2) = match z.len() {
            3 => (c(z[0].re, 0.0), c(z[1].re, z[2].re)),
            2 => (z[0], z[1]),
            1 => (z[0], c(0.0, 0.0)),
            _ => (c(0.0, 0.0), c(0.0, 0.0)),
        };
        OrbitRow { m: s.m, n: s.n, re_z1: z1.re, im_z1: z1.im, re_z2: z2.re, im_z2: z2.im, v: s.point.t }
    }
}

/// Writes the orbit as CSV with a header row and a trailing `# gap=` line.
pub fn write_orbit_csv<W: Write>(samples: &[OrbitSample], gap: f64, out: W) -> Result<(), HeisError> {
    let mut w = csv::Writer::from_writer(out);
    for s in samples {
        w.serialize(OrbitRow::from(s)).map_err(|e| HeisError::Csv(e.to_string()))?;
    }
    let mut inner = w.into_inner().map_err(|e| HeisError::Csv(e.to_string()))?;
    writeln!(inner, "# gap={gap:e}").map_err(|e| HeisError::Csv(e.to_string()))?;
    Ok(())
}

/// Translation part of an element of `R x S^1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Translation {
    /// `coeff * sqrt(radicand)`, radicand squarefree (1 for rationals).
    Surd { coeff: Rational64, radicand: u32 },
    /// A number known to be irrational, with its value.
    Irrational(f64),
    /// A float of unknown arithmetic nature.
    Raw(f64),
}

impl Translation {
    pub fn rational(num: i64, den: i64) -> Self {
        Translation::Surd { coeff: Rational64::new(num, den), radicand: 1 }
    }

    pub fn surd(num: i64, den: i64, radicand: u32) -> Result<Self, HeisError> {
        if !is_squarefree(radicand) {
            return Err(HeisError::NotSquarefree(radicand));
        }
        Ok(Translation::Surd { coeff: Rational64::new(num, den), radicand })
    }

    pub fn value(&self) -> f64 {
        match *self {
            Translation::Surd { coeff, radicand } => {
                *coeff.numer() as f64 / *coeff.denom() as f64 * (radicand as f64).sqrt()
            }
            Translation::Irrational(x) | Translation::Raw(x) => x,
        }
    }

    fn is_zero(&self) -> bool {
        match *self {
            Translation::Surd { coeff, .. } => coeff.is_zero(),
            Translation::Irrational(x) | Translation::Raw(x) => x == 0.0,
        }
    }

    /// Whether `self / other` is rational, when decidable.
    pub fn ratio_rational(&self, other: &Translation) -> Option<bool> {
        use Translation::*;
        match (*self, *other) {
            (Surd { radicand: r1, .. }, Surd { radicand: r2, .. }) => Some(r1 == r2),
            (Surd { radicand: 1, .. }, Irrational(_)) | (Irrational(_), Surd { radicand: 1, .. }) => Some(false),
            _ => None,
        }
    }
}

/// `(translation, angle)` in `R x S^1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RS1Element {
    pub translation: Translation,
    pub angle: Angle,
}

impl RS1Element {
    pub fn new(translation: Translation, angle: Angle) -> Result<Self, HeisError> {
        if translation.is_zero() {
            return Err(HeisError::ZeroTranslation);
        }
        Ok(RS1Element { translation, angle })
    }
}

/// Structure of `<T, U>` for `T = (a, 0)`, `U = (b, theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Rs1Verdict {
    /// `a / b` irrational.
    #[serde(rename = "nondiscrete-Z2")]
    NondiscreteZ2,
    /// `a / b` rational and `theta` a rational multiple of `pi`.
    #[serde(rename = "discrete-nonZ2")]
    DiscreteNonZ2,
    /// `a / b` rational and `theta` not a rational multiple of `pi`.
    #[serde(rename = "nondiscrete-Z2-rational")]
    NondiscreteZ2Rational,
}

impl Rs1Verdict {
    pub fn tag(&self) -> &'static str {
        match self {
            Rs1Verdict::NondiscreteZ2 => "nondiscrete-Z2",
            Rs1Verdict::DiscreteNonZ2 => "discrete-nonZ2",
            Rs1Verdict::NondiscreteZ2Rational => "nondiscrete-Z2-rational",
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Rs1Verdict::DiscreteNonZ2)
    }

    /// Verdict from the two rationality facts: `a / b` rational and
    /// `theta / pi` rational.
    pub fn from_rationality(ratio_rational: bool, angle_pi_rational: bool) -> Self {
        match (ratio_rational, angle_pi_rational) {
            (false, _) => Rs1Verdict::NondiscreteZ2,
            (true, true) => Rs1Verdict::DiscreteNonZ2,
            (true, false) => Rs1Verdict::NondiscreteZ2Rational,
        }
    }
}

pub fn rs1_classify(t: &RS1Element, u: &RS1Element) -> Result<Rs1Verdict, HeisError> {
    if !t.angle.is_zero_mod_2pi() {
        return Err(HeisError::RotatingFirstGenerator);
    }
    match t.translation.ratio_rational(&u.translation) {
        None => Err(HeisError::Undecidable("a/b")),
        Some(false) => Ok(Rs1Verdict::NondiscreteZ2),
        Some(true) => {
            let pi_rational = u.angle.pi_rational().ok_or(HeisError::Undecidable("theta/pi"))?;
            Ok(Rs1Verdict::from_rationality(true, pi_rational))
        }
    }
}

/// Outcome of the brute-force density probe on `<(a,0), (b,theta)>`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityProbe {
    pub elements: usize,
    pub relation: Option<(i64, i64)>,
    pub cells_small: usize,
    pub cells_large: usize,
    pub x_cells_small: usize,
    pub x_cells_large: usize,
    pub verdict: Rs1Verdict,
    /// False when the relation and saturation evidence disagree.
    pub consistent: bool,
}

/// Brute-force probe: enumerate `T^m U^n` for `|m|, |n| <= r` and for
/// `r / 2`, bucket the images in the window `|x| <= 2 max(|a|, |b|)` into
/// cells of size `eps`, and call the orbit discrete when the cell count
/// saturates. A relation is an element within `1e-9` of the identity.
pub fn rs1_density_probe(a: f64, b: f64, theta: f64, r: i64, eps: f64) -> DensityProbe {
    use std::collections::BTreeSet;
    use std::f64::consts::TAU;
    let w = 2.0 * a.abs().max(b.abs());
    let ang_cells = (TAU / eps).round() as i64;
    let half = r / 2;
    let mut relation = None;
    let mut cells = [BTreeSet::new(), BTreeSet::new()];
    let mut xcells = [BTreeSet::new(), BTreeSet::new()];
    for m in -r..=r {
        for n in -r..=r {
            let x = m as f64 * a + n as f64 * b;
            let phi = (n as f64 * theta).rem_euclid(TAU);
            let phi_dist = phi.min(TAU - phi);
            if (m, n) != (0, 0) && relation.is_none() && x.abs() <= 1e-9 && phi_dist <= 1e-9 {
                relation = Some((m, n));
            }
            if x.abs() > w {
                continue;
            }
            let cx = (x / eps).round() as i64;
            let cp = ((phi / eps).round() as i64).rem_euclid(ang_cells);
            let small = m.abs() <= half && n.abs() <= half;
            for (k, inside) in [small, true].into_iter().enumerate() {
                if inside {
                    cells[k].insert((cx, cp));
                    xcells[k].insert(cx);
                }
            }
        }
    }
    let discrete = cells[0].len() == cells[1].len();
    let x_saturated = xcells[0].len() == xcells[1].len();
    let verdict = if relation.is_some() {
        Rs1Verdict::DiscreteNonZ2
    } else if x_saturated {
        Rs1Verdict::NondiscreteZ2Rational
    } else {
        Rs1Verdict::NondiscreteZ2
    };
    DensityProbe {
        elements: ((2 * r + 1) * (2 * r + 1)) as usize,
        relation,
        cells_small: cells[0].len(),
        cells_large: cells[1].len(),
        x_cells_small: xcells[0].len(),
        x_cells_large: xcells[1].len(),
        verdict,
        consistent: relation.is_some() == discrete,
    }
}

/// Checks `g` preserves the Siegel form of its size numerically.
pub fn siegel_defect(g: &CMat) -> Result<f64, HeisError> {
    Ok(form_defect(g, &siegel_form::<CScalar>(g.n()), FormConvention::ConjTranspose)?)
}

/// Exact cusp generators of a Siegel-normalized cusp: `T_(a,0)` and
/// `T_((b1, b2), 0)` for real `a, b1, b2` in any ring.
pub fn cusp_generators_exact<T: Ring>(a: &T, b1: &T, b2: &T) -> (Mat<T>, Mat<T>) {
    let half = T::from_int(2).unit_inverse().expect("2 is invertible");
    let z = T::zero;
    let o = T::one;
    let t = Mat::from_rows(vec![
        vec![o(), a.neg_ref(), z(), a.mul_ref(a).mul_ref(&half).neg_ref()],
        vec![z(), o(), z(), a.clone()],
        vec![z(), z(), o(), z()],
        vec![z(), z(), z(), o()],
    ])
    .expect("4x4");
    let norm = b1.mul_ref(b1).add_ref(&b2.mul_ref(b2));
    let u = Mat::from_rows(vec![
        vec![o(), b1.neg_ref(), b2.neg_ref(), norm.mul_ref(&half).neg_ref()],
        vec![z(), o(), z(), b1.clone()],
        vec![z(), z(), o(), b2.clone()],
        vec![z(), z(), z(), o()],
    ])
    .expect("4x4");
    (t, u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_examples() {
        let p = HeisPoint::new(vec![c(0.0, 1.0)], 0.0);
        let q = HeisPoint::new(vec![c(1.0, 0.0)], 0.0);
        let r = heis_mul(&p, &q).unwrap();
        assert_eq!(r.z, vec![c(1.0, 1.0)]);
        assert_eq!(r.t, 2.0);
        let o = heis_mul(&p, &p.inverse()).unwrap();
        assert_eq!(o, HeisPoint::origin(1));
        assert!(heis_mul(&p, &HeisPoint::origin(2)).is_err());
    }

    #[test]
    fn vertical_translation_entry() {
        let m = stab_matrix(&StabKind::Translation(HeisPoint::new(vec![c(0.0, 0.0); 2], 3.0))).unwrap();
        assert_eq!(*m.get(0, 3), c(0.0, 1.5));
        assert_eq!(siegel_defect(&m).unwrap(), 0.0);
    }

    #[test]
    fn dilation_action() {
        let d = dilation(4, 2.0).unwrap();
        let p = HeisPoint::new(vec![c(1.0, -1.0), c(0.5, 0.0)], 0.75);
        let q = boundary_action(&d, &p).unwrap();
        assert!((q.z[0] - c(2.0, -2.0)).norm() < 1e-14 && (q.t - 3.0).abs() < 1e-14);
        assert!(matches!(dilation(4, 0.0), Err(HeisError::NonPositiveDilation(_))));
    }

    #[test]
    fn rs1_cases() {
        let t = RS1Element::new(Translation::rational(1, 1), Angle::ZERO).unwrap();
        let irr = RS1Element::new(Translation::surd(1, 1, 2).unwrap(), Angle::pi_frac(1, 3)).unwrap();
        assert_eq!(rs1_classify(&t, &irr).unwrap(), Rs1Verdict::NondiscreteZ2);
        let quarter = RS1Element::new(Translation::rational(1, 1), Angle::pi_frac(1, 2)).unwrap();
        assert_eq!(rs1_classify(&t, &quarter).unwrap(), Rs1Verdict::DiscreteNonZ2);
        let rad = RS1Element::new(Translation::rational(1, 1), Angle::rational_radians(1, 1)).unwrap();
        assert_eq!(rs1_classify(&t, &rad).unwrap(), Rs1Verdict::NondiscreteZ2Rational);
        let raw = RS1Element::new(Translation::Raw(1.0), Angle::ZERO).unwrap();
        assert!(matches!(rs1_classify(&raw, &quarter), Err(HeisError::Undecidable(_))));
        assert!(RS1Element::new(Translation::rational(0, 1), Angle::ZERO).is_err());
    }

    #[test]
    fn orbit_closed_form_matches_matrices() {
        let p0 = HeisPoint::new(vec![c(0.3, -0.7), c(1.1, 0.4)], 0.9);
        for (b1, b2) in [(0.0, -2.0), (0.5_f64.sqrt(), -7.0_f64.sqrt())] {
            let params = CuspParams::new(2f64.sqrt(), b1, b2, Angle::pi_frac(1, 3)).unwrap();
            for (m, n) in [(3, 5), (-2, -4), (0, 0), (1, -7)] {
                let closed = params.from_shifted(&orbit_point(&params, m, n, &params.to_shifted(&p0).unwrap()).unwrap()).unwrap();
                let direct = orbit_point_matrix(&params, m, n, &p0).unwrap();
                let dev = closed.z.iter().zip(&direct.z).map(|(x, y)| (x - y).norm()).fold((closed.t - direct.t).abs(), f64::max);
                assert!(dev < 1e-9, "({m},{n}) deviation {dev}");
            }
        }
    }

    #[test]
    fn origin_orbit_vertical() {
        let params = CuspParams::new(2f64.sqrt(), 0.0, -2.0, Angle::pi_frac(1, 3)).unwrap();
        let cu = params.center().unwrap();
        let p = orbit_point(&params, 3, 5, &HeisPoint::origin(2)).unwrap();
        assert!((p.z[0] - c(3.0 * 2f64.sqrt(), 0.0)).norm() < 1e-12);
        assert_eq!(p.z[1], c(0.0, 0.0));
        assert!((p.t - (-2.0 * 5.0 * -2.0 * cu.im)).abs() < 1e-12);
    }
}
