//! Bending deformations along a splitting, and the Bianchi families they
//! produce in `SU(3,1)` and `SO(4,1)`.
//!
//! For an HNN extension `Gamma = Gamma'*_z` with edge group `Delta`, and a
//! path `g_t` in the centralizer of `Delta`, the bent representation keeps
//! `Gamma'` and sends the stable letter `z` to `g_t i(z)`. For an amalgam
//! `Gamma_1 *_Delta Gamma_2` the second factor is conjugated by `g_t`.
//!
//! The Bianchi groups split over the modular group `<a, t>` with stable
//! letter `u`; the centralizer is `Diag(1, 1, u, 1)` in `SU(3,1)` and the
//! rotation `R_34(theta)` in `SO(4,1)`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::heisenberg::{cusp_generators_exact, rs1_classify, siegel_form, HeisError, RS1Element, Rs1Verdict, Translation};
use crate::isometry::{classify, IsoClass, IsoError, ParabolicKind, MIN_MARGIN};
use crate::matform::{preserves_form_exact, Backend, CMat, FormConvention, HermForm, Mat, MatError};
use crate::scalars::{is_squarefree, Angle, CScalar, ExtScalar, LaurentPoly, Ring};
use crate::words::{builtin_presentation, check_relations, Builtin, RelationReport, Rep, WordError};

/// Relative tolerance for numeric centralizer checks.
const COMMUTE_TOL: f64 = 1e-12;

/// Angle at which symbolic families are sampled for numeric probes (`u = i`).
pub fn probe_angle() -> Angle {
    Angle::pi_frac(1, 2)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BendError {
    #[error("d = {0} is not squarefree")]
    NotSquarefree(u32),
    #[error("d = {0} is not supported (d must be squarefree, at least 2, and not 3)")]
    UnsupportedD(u32),
    #[error("generator {0:?} is not in the base representation")]
    MissingGenerator(String),
    #[error("centralizer does not commute with edge generator {0:?}")]
    NotCentralizing(String),
    #[error("centralizer path is not the identity at the base parameter")]
    NotIdentityAtZero,
    #[error("amalgam factors disagree on shared generator {0:?}")]
    Inconsistent(String),
    #[error("algebra probe takes at most 8 generators of size at most 6, got {count} of size {n}")]
    ProbeTooLarge { count: usize, n: usize },
    #[error("algebra dimension indeterminate: rank margin {margin:.3} below {MIN_MARGIN}")]
    Indeterminate { margin: f64 },
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Iso(#[from] IsoError),
    #[error(transparent)]
    Heis(#[from] HeisError),
}

/// Whether `g` commutes with `h`: exactly, or to `1e-12` relative for floats.
fn commutes<T: Backend>(g: &Mat<T>, h: &Mat<T>) -> Result<bool, MatError> {
    let diff = g.try_mul(h)?.try_sub(&h.try_mul(g)?)?;
    let scale = match (T::size(g), T::size(h)) {
        (Some(a), Some(b)) => (a * b).max(1.0),
        _ => 1.0,
    };
    Ok(T::negligible(&diff, COMMUTE_TOL * scale))
}

fn is_identity_within<T: Backend>(g: &Mat<T>) -> Result<bool, MatError> {
    Ok(T::negligible(&g.try_sub(&Mat::identity(g.n()))?, COMMUTE_TOL))
}

/// HNN bending data: base representation, stable letter, edge generators
/// and a centralizer path `t -> g_t`.
pub struct BendDataHnn<T, F> {
    base: Rep<T>,
    stable: String,
    edge: Vec<String>,
    centralizer: F,
}

impl<T: Backend, F> BendDataHnn<T, F> {
    /// Checks the symbols and `g_zero = I`.
    pub fn new<P>(base: Rep<T>, stable: &str, edge: &[&str], centralizer: F, zero: &P) -> Result<Self, BendError>
    where
        F: Fn(&P) -> Mat<T>,
    {
        for s in edge.iter().chain(std::iter::once(&stable)) {
            base.image(s).map_err(|_| BendError::MissingGenerator(s.to_string()))?;
        }
        if !is_identity_within(&centralizer(zero))? {
            return Err(BendError::NotIdentityAtZero);
        }
        Ok(BendDataHnn {
            base,
            stable: stable.to_string(),
            edge: edge.iter().map(|s| s.to_string()).collect(),
            centralizer,
        })
    }

    pub fn base(&self) -> &Rep<T> {
        &self.base
    }
}

/// `z -> g_t i(z)`, every other generator unchanged.
pub fn bend_hnn<T: Backend, P, F: Fn(&P) -> Mat<T>>(data: &BendDataHnn<T, F>, t: &P) -> Result<Rep<T>, BendError> {
    let g = (data.centralizer)(t);
    for s in &data.edge {
        if !commutes(&g, data.base.image(s)?)? {
            return Err(BendError::NotCentralizing(s.clone()));
        }
    }
    let z = g.try_mul(data.base.image(&data.stable)?)?;
    Ok(data.base.replace(&data.stable, z)?)
}

/// Amalgam bending data: generator images of both factors, the edge
/// generators (images in the ambient group), and a centralizer path.
pub struct BendDataAmalgam<T, F> {
    first: Vec<(String, Mat<T>)>,
    second: Vec<(String, Mat<T>)>,
    edge: Vec<(String, Mat<T>)>,
    centralizer: F,
}

impl<T: Backend, F> BendDataAmalgam<T, F> {
    pub fn new<P>(
        first: Vec<(String, Mat<T>)>,
        second: Vec<(String, Mat<T>)>,
        edge: Vec<(String, Mat<T>)>,
        centralizer: F,
        zero: &P,
    ) -> Result<Self, BendError>
    where
        F: Fn(&P) -> Mat<T>,
    {
        if !is_identity_within(&centralizer(zero))? {
            return Err(BendError::NotIdentityAtZero);
        }
        Ok(BendDataAmalgam { first, second, edge, centralizer })
    }
}

/// First factor fixed, second conjugated by `g_t`. A symbol present in both
/// factors must have the same image under both clauses.
pub fn bend_amalgam<T: Backend, P, F: Fn(&P) -> Mat<T>>(data: &BendDataAmalgam<T, F>, t: &P) -> Result<Rep<T>, BendError> {
    let g = (data.centralizer)(t);
    let g_inv = g.inverse()?;
    for (s, d) in &data.edge {
        if !commutes(&g, d)? {
            return Err(BendError::NotCentralizing(s.clone()));
        }
    }
    let mut images: BTreeMap<String, Mat<T>> = data.first.iter().cloned().collect();
    for (s, m) in &data.second {
        let conj = g.try_mul(m)?.try_mul(&g_inv)?;
        if let Some(prev) = images.get(s) {
            let diff = prev.try_sub(&conj)?;
            if !T::negligible(&diff, COMMUTE_TOL) {
                return Err(BendError::Inconsistent(s.clone()));
            }
            continue;
        }
        images.insert(s.clone(), conj);
    }
    Ok(Rep::new(images)?)
}

/// Ambient group of a Bianchi family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Su31,
    So41,
}

impl Target {
    pub fn dim(&self) -> usize {
        match self {
            Target::Su31 => 4,
            Target::So41 => 5,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Target::Su31 => "su31",
            Target::So41 => "so41",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl Serialize for Target {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.tag())
    }
}

impl std::str::FromStr for Target {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "su31" => Ok(Target::Su31),
            "so41" => Ok(Target::So41),
            other => Err(format!("unknown target {other:?} (expected su31 or so41)")),
        }
    }
}

/// Scalars the Bianchi matrices can be written in.
pub trait BianchiScalar: Backend + fmt::Display {
    fn rat(num: &BigRational) -> Self;
    /// `q sqrt 2`.
    fn sqrt2_times(q: &BigRational) -> Self;
    /// `q sqrt(2d)`.
    fn sqrt_2d_times(d: u32, q: &BigRational) -> Self;
}

fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl BianchiScalar for ExtScalar {
    fn rat(x: &BigRational) -> Self {
        ExtScalar::from_laurent(LaurentPoly::monomial(x.clone(), 0))
    }
    fn sqrt2_times(x: &BigRational) -> Self {
        ExtScalar::sqrt2(1, 1).mul_ref(&Self::rat(x))
    }
    fn sqrt_2d_times(d: u32, x: &BigRational) -> Self {
        ExtScalar::sqrt_2d(d, 1, 1).expect("d validated by caller").mul_ref(&Self::rat(x))
    }
}

fn big_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

impl BianchiScalar for CScalar {
    fn rat(x: &BigRational) -> Self {
        CScalar::new(big_f64(x), 0.0)
    }
    fn sqrt2_times(x: &BigRational) -> Self {
        CScalar::new(std::f64::consts::SQRT_2 * big_f64(x), 0.0)
    }
    fn sqrt_2d_times(d: u32, x: &BigRational) -> Self {
        CScalar::new((2.0 * d as f64).sqrt() * big_f64(x), 0.0)
    }
}

/// Accepts squarefree `d >= 2`, `d != 3`.
pub fn validate_d(d: u32) -> Result<(), BendError> {
    if d < 2 || d == 3 {
        return Err(BendError::UnsupportedD(d));
    }
    if !is_squarefree(d) {
        return Err(BendError::NotSquarefree(d));
    }
    Ok(())
}

fn int<T: BianchiScalar>(n: i64) -> T {
    T::from_int(n)
}

/// `A_1`, the order-two modular generator.
pub fn modular_a<T: BianchiScalar>() -> Mat<T> {
    Mat::from_ints(&[&[0, 0, 0, -1], &[0, -1, 0, 0], &[0, 0, 1, 0], &[-1, 0, 0, 0]]).expect("4x4")
}

/// `T_1`, the modular translation.
pub fn modular_t<T: BianchiScalar>() -> Mat<T> {
    let r2 = T::sqrt2_times(&q(1, 1));
    let mut m = Mat::identity(4);
    m.set(0, 1, r2.neg_ref());
    m.set(0, 3, int(-1));
    m.set(1, 3, r2);
    m
}

/// Undeformed `U_1`; the shape depends on `d mod 4`.
pub fn undeformed_u<T: BianchiScalar>(d: u32) -> Mat<T> {
    let mut m = Mat::identity(4);
    let dd = d as i64;
    if d % 4 == 3 {
        m.set(0, 1, T::sqrt2_times(&q(-1, 2)));
        m.set(0, 2, T::sqrt_2d_times(d, &q(1, 2)));
        m.set(0, 3, T::rat(&q(-(dd + 1), 4)));
        m.set(1, 3, T::sqrt2_times(&q(1, 2)));
        m.set(2, 3, T::sqrt_2d_times(d, &q(-1, 2)));
    } else {
        m.set(0, 2, T::sqrt_2d_times(d, &q(1, 1)));
        m.set(0, 3, int(-dd));
        m.set(2, 3, T::sqrt_2d_times(d, &q(-1, 1)));
    }
    m
}

/// Cusp parameters `(a, b1, b2)` with `T_1 = T_(a,0)` and `U_1 = T_((b1,b2),0)`.
pub fn cusp_parameters<T: BianchiScalar>(d: u32) -> (T, T, T) {
    let a = T::sqrt2_times(&q(1, 1));
    if d % 4 == 3 {
        (a, T::sqrt2_times(&q(1, 2)), T::sqrt_2d_times(d, &q(-1, 2)))
    } else {
        (a, T::zero(), T::sqrt_2d_times(d, &q(-1, 1)))
    }
}

/// Inserts a fixed fourth coordinate: `SU(3,1)` shapes to `SO(4,1)` shapes.
pub fn embed_so41<T: Ring>(m: &Mat<T>) -> Mat<T> {
    let idx = |i: usize| match i {
        0..=2 => Some(i),
        3 => None,
        _ => Some(3),
    };
    Mat::from_fn(5, |i, j| match (idx(i), idx(j)) {
        (Some(a), Some(b)) => m.get(a, b).clone(),
        (None, None) => T::one(),
        _ => T::zero(),
    })
}

/// `Diag(1, 1, u, 1)`.
pub fn centralizer_su31<T: Ring>(u: T) -> Mat<T> {
    Mat::diag(vec![T::one(), T::one(), u, T::one()])
}

/// Rotation by `(c, s)` in coordinates 3 and 4 of the 5-dimensional model.
pub fn centralizer_so41<T: Ring>(c: T, s: T) -> Mat<T> {
    let mut m = Mat::identity(5);
    m.set(2, 2, c.clone());
    m.set(2, 3, s.neg_ref());
    m.set(3, 2, s);
    m.set(3, 3, c);
    m
}

/// `R_34(theta)` numerically.
pub fn centralizer_so41_angle(theta: &Angle) -> CMat {
    let (c, s) = theta.cos_sin();
    centralizer_so41(CScalar::new(c, 0.0), CScalar::new(s, 0.0))
}

/// `((1 - s^2) / (1 + s^2), 2 s / (1 + s^2))`.
pub fn pythagorean_pair(s: &Rational64) -> (BigRational, BigRational) {
    let s = BigRational::new(BigInt::from(*s.numer()), BigInt::from(*s.denom()));
    let one = BigRational::one();
    let den = &one + &s * &s;
    ((&one - &s * &s) / &den, (BigRational::from_integer(2.into()) * &s) / &den)
}

/// The angle of a Pythagorean pair is a rational multiple of `pi` only for
/// `s` in `{0, 1, -1}`: otherwise its cosine is rational but not in
/// `{0, ±1/2, ±1}`.
pub fn pythagorean_pi_rational(s: &Rational64) -> bool {
    s.is_zero() || s.abs() == Rational64::one()
}

/// Parameter of a Bianchi family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BianchiParam {
    /// `u` left as a symbol.
    SymbolicU,
    /// `u = e^{i alpha}`.
    U(Angle),
    /// Rotation angle in `SO(4,1)`.
    Theta(Angle),
    /// Rotation by an exact Pythagorean pair with parameter `s`.
    Pythagorean(Rational64),
}

impl BianchiParam {
    pub fn target(&self) -> Target {
        match self {
            BianchiParam::SymbolicU | BianchiParam::U(_) => Target::Su31,
            BianchiParam::Theta(_) | BianchiParam::Pythagorean(_) => Target::So41,
        }
    }

    /// Whether this is the undeformed lattice embedding.
    pub fn is_undeformed(&self) -> bool {
        match self {
            BianchiParam::SymbolicU => false,
            BianchiParam::U(a) | BianchiParam::Theta(a) => a.is_zero_mod_2pi(),
            BianchiParam::Pythagorean(s) => s.is_zero(),
        }
    }

    /// Numeric angle; `None` for symbolic `u`.
    pub fn angle(&self) -> Option<f64> {
        match self {
            BianchiParam::SymbolicU => None,
            BianchiParam::U(a) | BianchiParam::Theta(a) => Some(a.to_radians()),
            BianchiParam::Pythagorean(s) => {
                let (c, sn) = pythagorean_pair(s);
                Some(big_f64(&sn).atan2(big_f64(&c)))
            }
        }
    }
}

impl fmt::Display for BianchiParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BianchiParam::SymbolicU => write!(f, "u"),
            BianchiParam::U(a) => write!(f, "u=exp(i*{a})"),
            BianchiParam::Theta(a) => write!(f, "theta={a}"),
            BianchiParam::Pythagorean(s) => write!(f, "pythagorean({s})"),
        }
    }
}

impl Serialize for BianchiParam {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Generators of a bent Bianchi representation with their ambient form.
#[derive(Debug, Clone)]
pub struct BianchiFamily<T> {
    pub d: u32,
    pub param: BianchiParam,
    pub a: Mat<T>,
    pub t: Mat<T>,
    pub u: Mat<T>,
    pub centralizer: Mat<T>,
    pub form: HermForm<T>,
}

impl<T: BianchiScalar> BianchiFamily<T> {
    pub fn target(&self) -> Target {
        self.param.target()
    }

    pub fn rep(&self) -> Result<Rep<T>, WordError> {
        Rep::new([("a", self.a.clone()), ("t", self.t.clone()), ("u", self.u.clone())])
    }

    /// Bends the lattice embedding along `<a, t>` by `g`.
    fn bent(d: u32, param: BianchiParam, g: Mat<T>) -> Result<Self, BendError> {
        validate_d(d)?;
        let so41 = param.target() == Target::So41;
        let shape = |m: Mat<T>| if so41 { embed_so41(&m) } else { m };
        let base = Rep::new([
            ("a", shape(modular_a())),
            ("t", shape(modular_t())),
            ("u", shape(undeformed_u(d))),
        ])?;
        let n = base.n();
        let data = BendDataHnn::new(base, "u", &["a", "t"], |g: &Mat<T>| g.clone(), &Mat::<T>::identity(n))?;
        let rep = bend_hnn(&data, &g)?;
        Ok(BianchiFamily {
            d,
            param,
            a: rep.image("a")?.clone(),
            t: rep.image("t")?.clone(),
            u: rep.image("u")?.clone(),
            centralizer: g,
            form: siegel_form(n),
        })
    }
}

impl BianchiFamily<ExtScalar> {
    /// `SU(3,1)` family with symbolic `u`.
    pub fn su31_symbolic(d: u32) -> Result<Self, BendError> {
        Self::bent(d, BianchiParam::SymbolicU, centralizer_su31(ExtScalar::u()))
    }

    /// `SO(4,1)` family rotated by an exact Pythagorean pair.
    pub fn so41_pythagorean(d: u32, s: Rational64) -> Result<Self, BendError> {
        let (c, sn) = pythagorean_pair(&s);
        let g = centralizer_so41(ExtScalar::rat(&c), ExtScalar::rat(&sn));
        Self::bent(d, BianchiParam::Pythagorean(s), g)
    }

    pub fn eval_unit(&self, alpha: &Angle) -> Result<BianchiFamily<CScalar>, BendError> {
        let param = match self.param {
            BianchiParam::SymbolicU => BianchiParam::U(*alpha),
            other => other,
        };
        Ok(BianchiFamily {
            d: self.d,
            param,
            a: self.a.eval_unit(alpha),
            t: self.t.eval_unit(alpha),
            u: self.u.eval_unit(alpha),
            centralizer: self.centralizer.eval_unit(alpha),
            form: self.form.eval_unit(alpha)?,
        })
    }
}

impl BianchiFamily<CScalar> {
    /// `SU(3,1)` family at `u = e^{i alpha}`.
    pub fn su31_at(d: u32, alpha: &Angle) -> Result<Self, BendError> {
        let mut fam = BianchiFamily::su31_symbolic(d)?.eval_unit(alpha)?;
        fam.param = BianchiParam::U(*alpha);
        Ok(fam)
    }

    /// `SO(4,1)` family at rotation angle `theta`.
    pub fn so41_at(d: u32, theta: &Angle) -> Result<Self, BendError> {
        Self::bent(d, BianchiParam::Theta(*theta), centralizer_so41_angle(theta))
    }
}

/// Family for any parameter kind, exact where the parameter allows it.
pub enum AnyBianchi {
    Exact(BianchiFamily<ExtScalar>),
    Numeric(BianchiFamily<CScalar>),
}

pub fn bianchi_family(d: u32, param: BianchiParam) -> Result<AnyBianchi, BendError> {
    Ok(match param {
        BianchiParam::SymbolicU => AnyBianchi::Exact(BianchiFamily::su31_symbolic(d)?),
        BianchiParam::Pythagorean(s) => AnyBianchi::Exact(BianchiFamily::so41_pythagorean(d, s)?),
        BianchiParam::U(a) => AnyBianchi::Numeric(BianchiFamily::su31_at(d, &a)?),
        BianchiParam::Theta(a) => AnyBianchi::Numeric(BianchiFamily::so41_at(d, &a)?),
    })
}

/// Dimension of the algebra spanned by the generators, with the margin of
/// the rank decisions behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlgebraDim {
    pub dim: usize,
    pub margin: f64,
}

fn vec_of(m: &CMat) -> Vec<CScalar> {
    m.entries().copied().collect()
}

/// Dimension of the linear span of all words of length at most `2 n^2`
/// in `gens`, grown breadth first and stopped once a level adds nothing.
///
/// A word joins the basis when its residual against the current span
/// exceeds `tol` times its norm; the margin is the distance, as a factor,
/// of the closest accepted or rejected residual from that threshold,
/// combined with the smallest singular value of the normalized basis.
pub fn algebra_dimension(gens: &[CMat], tol: f64) -> Result<AlgebraDim, BendError> {
    let n = gens.first().map_or(0, |g| g.n());
    if gens.is_empty() || gens.len() > 8 || n > 6 {
        return Err(BendError::ProbeTooLarge { count: gens.len(), n });
    }
    let mut basis: Vec<Vec<CScalar>> = Vec::new();
    let mut margin = f64::INFINITY;
    let mut try_add = |m: &CMat, basis: &mut Vec<Vec<CScalar>>| -> bool {
        let mut v = vec_of(m);
        let norm0 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            return false;
        }
        // two passes of Gram-Schmidt for stability
        for _ in 0..2 {
            for b in basis.iter() {
                let c: CScalar = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                v.iter_mut().zip(b).for_each(|(y, x)| *y -= c * x);
            }
        }
        let res = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / norm0;
        let ratio = if res > tol { res / tol } else if res == 0.0 { f64::INFINITY } else { tol / res };
        margin = margin.min(ratio);
        if res > tol {
            let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            basis.push(v.into_iter().map(|z| z / nv).collect());
            true
        } else {
            false
        }
    };
    let id = CMat::identity(n);
    try_add(&id, &mut basis);
    let mut frontier = vec![id];
    for _ in 0..2 * n * n {
        let mut next = Vec::new();
        for w in &frontier {
            for g in gens {
                let x = w.try_mul(g)?;
                if try_add(&x, &mut basis) {
                    next.push(x);
                }
            }
        }
        if next.is_empty() || basis.len() == n * n {
            break;
        }
        frontier = next;
    }
    let k = basis.len();
    let stack = DMatrix::from_fn(k, n * n, |i, j| basis[i][j]);
    let s = stack.singular_values();
    let smin = s.iter().copied().fold(f64::INFINITY, f64::min);
    margin = margin.min(smin / tol);
    if margin < MIN_MARGIN {
        return Err(BendError::Indeterminate { margin });
    }
    Ok(AlgebraDim { dim: k, margin })
}

/// Cusp group data in a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CuspReport {
    pub b1: String,
    pub orthogonal: bool,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BianchiReport {
    pub family: &'static str,
    pub d: u32,
    pub target: Target,
    pub param: BianchiParam,
    pub exact: bool,
    /// `None` when no presentation is shipped for `d`.
    pub relations: Option<RelationReport>,
    pub trace_u: Option<String>,
    pub class_u: Option<IsoClass>,
    pub class_error: Option<String>,
    /// Angle at which `class_u` and `algebra_dim` were computed, when the
    /// family itself is symbolic.
    pub probe: Option<Angle>,
    pub cusp: CuspReport,
    pub algebra_dim: Option<AlgebraDim>,
    pub annotations: Vec<String>,
    pub checks: BTreeMap<String, bool>,
    pub passed: bool,
}

fn relations_for<T: Backend + fmt::Display>(d: u32, rep: &Rep<T>, tol: f64) -> Result<Option<RelationReport>, BendError> {
    if ![2, 7, 11].contains(&d) {
        return Ok(None);
    }
    let pres = builtin_presentation(Builtin::Bianchi(d))?;
    Ok(Some(check_relations(rep, &pres, tol)?))
}

fn forms_exact(fam: &BianchiFamily<ExtScalar>) -> Result<bool, BendError> {
    let mut ok = true;
    for g in [&fam.a, &fam.t, &fam.u, &fam.centralizer] {
        ok &= preserves_form_exact(g, &fam.form, FormConvention::ConjTranspose)?;
    }
    Ok(ok)
}

fn forms_numeric(fam: &BianchiFamily<CScalar>, tol: f64) -> Result<bool, BendError> {
    let mut ok = true;
    for g in [&fam.a, &fam.t, &fam.u, &fam.centralizer] {
        let defect = crate::matform::form_defect(g, &fam.form, FormConvention::ConjTranspose)?;
        ok &= defect <= tol * g.max_abs().powi(2).max(1.0);
    }
    Ok(ok)
}

fn centralizes<T: Backend>(fam: &BianchiFamily<T>) -> Result<bool, BendError> {
    Ok(commutes(&fam.centralizer, &fam.a)? && commutes(&fam.centralizer, &fam.t)?)
}

/// Whether the extracted cusp parameters rebuild `T_1` and `U_1` exactly.
pub fn cusp_consistent(d: u32) -> Result<bool, BendError> {
    validate_d(d)?;
    let (a, b1, b2) = cusp_parameters::<ExtScalar>(d);
    let (t, u) = cusp_generators_exact(&a, &b1, &b2);
    Ok(t == modular_t() && u == undeformed_u(d))
}

fn rel_check_name(r: &Option<RelationReport>) -> bool {
    r.as_ref().is_none_or(|r| r.all_projective())
}

/// Exact checks of the bent `SU(3,1)` family, with numeric classification
/// and Burnside probe at `alpha` (or at `u = i` when `alpha` is `None`).
pub fn verify_bianchi_su31(d: u32, alpha: Option<Angle>, tol: f64) -> Result<BianchiReport, BendError> {
    let fam = BianchiFamily::su31_symbolic(d)?;
    let rep = fam.rep()?;
    let relations = relations_for(d, &rep, 0.0)?;
    let trace = fam.u.trace();
    let expected_trace = ExtScalar::int(3).add_ref(&ExtScalar::u());

    let at = alpha.unwrap_or_else(probe_angle);
    let num = fam.eval_unit(&at)?;
    let (class_u, class_error) = match classify(&num.u, &num.form, tol) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let undeformed = at.is_zero_mod_2pi();
    let class_ok = class_u.is_some_and(|c| u_class_ok(Target::Su31, d, undeformed, c));
    let algebra = algebra_dimension(&[num.a.clone(), num.t.clone(), num.u.clone()], tol);

    let (_, b1, _) = cusp_parameters::<ExtScalar>(d);
    let orthogonal = b1.is_zero();
    let verdict = if orthogonal { "strongly-parabolic-preserving" } else { "parabolic-preserving" };
    let mut annotations = Vec::new();
    if orthogonal {
        annotations.push("orthogonal cusp: the bent cusp group is discrete".to_string());
    }
    if !undeformed {
        annotations.push("Tr U = 3+u is not real, so the image is in no real form".to_string());
    }

    let mut checks = BTreeMap::new();
    checks.insert("relations".to_string(), rel_check_name(&relations));
    checks.insert("traceU".to_string(), trace == expected_trace);
    checks.insert("form".to_string(), forms_exact(&fam)?);
    checks.insert("centralizer".to_string(), centralizes(&fam)?);
    checks.insert("cuspParameters".to_string(), cusp_consistent(d)?);
    checks.insert("classU".to_string(), class_ok);
    checks.insert("algebraDim".to_string(), algebra.as_ref().is_ok_and(|a| a.dim == 16));
    let passed = checks.values().all(|&b| b);
    Ok(BianchiReport {
        family: "bianchi",
        d,
        target: Target::Su31,
        param: alpha.map_or(BianchiParam::SymbolicU, BianchiParam::U),
        exact: true,
        relations,
        trace_u: Some(trace.to_string()),
        class_u,
        class_error,
        probe: alpha.is_none().then_some(at),
        cusp: CuspReport { b1: b1.to_string(), orthogonal, verdict: verdict.to_string() },
        algebra_dim: algebra.ok(),
        annotations,
        checks,
        passed,
    })
}

/// Whether `class` is the type `U` must have: parabolic in `SU(3,1)`;
/// in `SO(4,1)` elliptic for `d = 1, 2 mod 4` and ellipto-parabolic for
/// `d = 3 mod 4`; unipotent when undeformed.
pub fn u_class_ok(target: Target, d: u32, undeformed: bool, class: IsoClass) -> bool {
    if undeformed {
        return class.is_unipotent();
    }
    match target {
        Target::Su31 => class.is_parabolic(),
        Target::So41 if d % 4 == 3 => class == IsoClass::Parabolic(ParabolicKind::EllipticParabolic),
        Target::So41 => class.is_elliptic(),
    }
}

fn so41_verdict(d: u32, param: &BianchiParam) -> String {
    if d % 4 != 3 {
        return if param.is_undeformed() { "unipotent-cusp" } else { "elliptic-in-cusp-group" }.to_string();
    }
    // T translates by sqrt 2, U by sqrt 2 / 2: rational ratio
    let t = Translation::surd(1, 1, 2).and_then(|x| RS1Element::new(x, Angle::ZERO));
    let b = Translation::surd(1, 2, 2);
    match param {
        BianchiParam::Pythagorean(s) => Rs1Verdict::from_rationality(true, pythagorean_pi_rational(s)).tag().to_string(),
        BianchiParam::Theta(theta) => match (t, b.and_then(|b| RS1Element::new(b, *theta))) {
            (Ok(t), Ok(u)) => rs1_classify(&t, &u).map_or_else(|e| format!("undecidable: {e}"), |v| v.tag().to_string()),
            _ => "undecidable".to_string(),
        },
        _ => "undecidable".to_string(),
    }
}

/// Checks of the bent `SO(4,1)` family: exact for a Pythagorean parameter,
/// numeric at `tol` for an angle.
pub fn verify_bianchi_so41(d: u32, param: BianchiParam, tol: f64) -> Result<BianchiReport, BendError> {
    let (num, relations, form_ok, central_ok, exact) = match bianchi_family(d, param)? {
        AnyBianchi::Exact(fam) => {
            let rel = relations_for(d, &fam.rep()?, 0.0)?;
            let form = forms_exact(&fam)?;
            let cent = centralizes(&fam)?;
            (fam.eval_unit(&Angle::ZERO)?, rel, form, cent, true)
        }
        AnyBianchi::Numeric(fam) => {
            let rel = relations_for(d, &fam.rep()?, tol)?;
            let form = forms_numeric(&fam, tol)?;
            let cent = centralizes(&fam)?;
            (fam, rel, form, cent, false)
        }
    };
    let undeformed = param.is_undeformed();
    let (class_u, class_error) = match classify(&num.u, &num.form, tol) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let class_ok = class_u.is_some_and(|c| u_class_ok(Target::So41, d, undeformed, c));
    let (_, b1, _) = cusp_parameters::<ExtScalar>(d);
    let orthogonal = b1.is_zero();
    let verdict = so41_verdict(d, &param);
    let mut annotations = Vec::new();
    if !undeformed {
        annotations.push(
            if orthogonal {
                "U is elliptic: not parabolic-preserving"
            } else {
                "U is ellipto-parabolic: parabolic-preserving"
            }
            .to_string(),
        );
    }
    let algebra = algebra_dimension(&[num.a.clone(), num.t.clone(), num.u.clone()], tol).ok();

    let mut checks = BTreeMap::new();
    checks.insert("relations".to_string(), rel_check_name(&relations));
    checks.insert("form".to_string(), form_ok);
    checks.insert("centralizer".to_string(), central_ok);
    checks.insert("cuspParameters".to_string(), cusp_consistent(d)?);
    checks.insert("classU".to_string(), class_ok);
    let passed = checks.values().all(|&b| b);
    Ok(BianchiReport {
        family: "bianchi",
        d,
        target: Target::So41,
        param,
        exact,
        relations,
        trace_u: Some(num.u.trace().re.to_string()),
        class_u,
        class_error,
        probe: None,
        cusp: CuspReport { b1: b1.to_string(), orthogonal, verdict },
        algebra_dim: algebra,
        annotations,
        checks,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ext(n: i64) -> ExtScalar {
        ExtScalar::int(n)
    }

    #[test]
    fn d2_entries() {
        let fam = BianchiFamily::su31_symbolic(2).unwrap();
        assert_eq!(*fam.u.get(0, 2), ext(2));
        assert_eq!(*fam.u.get(0, 3), ext(-2));
        assert_eq!(*fam.u.get(2, 3), ExtScalar::u().mul_ref(&ext(-2)));
    }

    #[test]
    fn d7_first_row() {
        let fam = BianchiFamily::su31_symbolic(7).unwrap();
        let row: Vec<ExtScalar> = (0..4).map(|j| fam.u.get(0, j).clone()).collect();
        assert_eq!(row, vec![ext(1), ExtScalar::sqrt2(-1, 2), ExtScalar::sqrt_2d(7, 1, 2).unwrap(), ext(-2)]);
    }

    #[test]
    fn unsupported_d() {
        assert!(matches!(BianchiFamily::su31_symbolic(3), Err(BendError::UnsupportedD(3))));
        assert!(matches!(BianchiFamily::su31_symbolic(1), Err(BendError::UnsupportedD(1))));
        assert!(matches!(BianchiFamily::su31_symbolic(12), Err(BendError::NotSquarefree(12))));
    }

    #[test]
    fn centralizer_values() {
        assert!(centralizer_su31(CScalar::new(1.0, 0.0)).is_identity());
        let r = centralizer_so41_angle(&Angle::pi_frac(1, 1));
        let diag: Vec<f64> = (0..5).map(|i| r.get(i, i).re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0, 1.0]);
        let g = centralizer_su31(ExtScalar::u());
        assert!(g.commutes_with(&modular_a()).unwrap());
        assert!(g.commutes_with(&modular_t()).unwrap());
    }

    #[test]
    fn so41_rows() {
        let theta = Angle::radians(0.7);
        let fam = BianchiFamily::so41_at(2, &theta).unwrap();
        let (c, s) = theta.cos_sin();
        assert!((fam.u.get(2, 4).re + 2.0 * c).abs() < 1e-15);
        assert!((fam.u.get(3, 4).re + 2.0 * s).abs() < 1e-15);
        assert!((fam.u.get(2, 3).re + s).abs() < 1e-15);
    }

    #[test]
    fn bend_at_zero_is_base() {
        let base = Rep::new([("a", modular_a::<ExtScalar>()), ("t", modular_t()), ("u", undeformed_u(2))]).unwrap();
        let data = BendDataHnn::new(base.clone(), "u", &["a", "t"], |u: &ExtScalar| centralizer_su31(u.clone()), &ext(1)).unwrap();
        let r = bend_hnn(&data, &ext(1)).unwrap();
        assert_eq!(r.image("u").unwrap(), base.image("u").unwrap());
    }

    #[test]
    fn non_centralizing_rejected() {
        let base = Rep::new([("a", modular_a::<ExtScalar>()), ("t", modular_t()), ("u", undeformed_u(2))]).unwrap();
        let path = |u: &ExtScalar| Mat::diag(vec![u.clone(), ext(1), ext(1), ext(1)]);
        let data = BendDataHnn::new(base, "u", &["a", "t"], path, &ext(1)).unwrap();
        assert!(matches!(bend_hnn(&data, &ExtScalar::u()), Err(BendError::NotCentralizing(_))));
    }

    #[test]
    fn toy_amalgam() {
        let c = |x: f64| CScalar::new(x, 0.0);
        let dil = CMat::diag(vec![c(2.0), c(1.0), c(1.0), c(0.5)]);
        let lox = undeformed_u::<CScalar>(2).try_mul(&dil).unwrap();
        let form = siegel_form::<CScalar>(4);
        assert_eq!(classify(&lox, &form, 1e-9).unwrap(), IsoClass::Loxodromic);
        let data = BendDataAmalgam::new(
            vec![("x".into(), lox.clone())],
            vec![("y".into(), lox.clone())],
            vec![],
            |th: &Angle| centralizer_su31(th.unit()),
            &Angle::ZERO,
        )
        .unwrap();
        let r0 = bend_amalgam(&data, &Angle::ZERO).unwrap();
        assert_eq!(r0.image("y").unwrap(), &lox);
        let r = bend_amalgam(&data, &Angle::radians(0.4)).unwrap();
        assert_eq!(r.image("x").unwrap(), &lox);
        assert!(r.image("y").unwrap().max_abs_diff(&lox).unwrap() > 0.1);
    }

    #[test]
    fn amalgam_edge_fixed() {
        let a = modular_a::<CScalar>();
        let t = modular_t::<CScalar>();
        let u = undeformed_u::<CScalar>(2);
        let data = BendDataAmalgam::new(
            vec![("a".into(), a.clone()), ("t".into(), t.clone())],
            vec![("a".into(), a.clone()), ("u".into(), u.clone())],
            vec![("a".into(), a.clone()), ("t".into(), t.clone())],
            |th: &Angle| centralizer_su31(th.unit()),
            &Angle::ZERO,
        )
        .unwrap();
        let r = bend_amalgam(&data, &Angle::radians(1.0)).unwrap();
        assert_eq!(r.image("a").unwrap(), &a);
        assert!(r.image("u").unwrap().max_abs_diff(&u).unwrap() > 0.1);
    }

    #[test]
    fn algebra_identity() {
        assert_eq!(algebra_dimension(&[CMat::identity(4)], 1e-9).unwrap().dim, 1);
    }

    #[test]
    fn cusp_params_rebuild() {
        for d in [2, 5, 6, 7, 11] {
            assert!(cusp_consistent(d).unwrap(), "d = {d}");
        }
    }

    #[test]
    fn pythagorean() {
        let (c, s) = pythagorean_pair(&Rational64::new(1, 2));
        assert_eq!(c, q(3, 5));
        assert_eq!(s, q(4, 5));
        assert!(!pythagorean_pi_rational(&Rational64::new(1, 2)));
        assert!(pythagorean_pi_rational(&Rational64::new(-1, 1)));
    }
}
