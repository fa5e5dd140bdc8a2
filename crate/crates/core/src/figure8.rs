//! The one-parameter family of representations of the figure-eight knot
//! group into `U(J_u)`, with `u` on the unit circle.
//!
//! Symbolic entries live in `Q[u, u^-1]` with `conj(u) = u^-1`. The form
//! is preserved in the convention `g^T J conj(g) = J`, which is the same as
//! `g* conj(J) g = conj(J)`; classification therefore runs against
//! `conj(J)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::isometry::{classify_detailed, IsoClass, IsoError};
use crate::matform::{form_defect_matrix, herm_signature, Backend, EigenCluster, FormConvention, HermForm, Mat, MatError, Signature};
use crate::scalars::{Angle, CScalar, LaurentPoly, Ring};
use crate::words::{builtin_presentation_with, check_relations, eval_word, in_z_laurent, trace_word, Builtin, CommutatorConvention, Rep, Word, WordError};

/// Tolerance for invariants of numeric instances.
const NUMERIC_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Fig8Error {
    #[error("transcription check failed: {0}")]
    Transcription(&'static str),
    #[error("alpha = {alpha}: signature {got}, expected {expected}")]
    Signature { alpha: f64, got: Signature, expected: Signature },
    #[error("alpha = {0} is outside |alpha| < 2pi/3")]
    OutsideRegime(f64),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Iso(#[from] IsoError),
}

fn lp(terms: &[(i32, i64, i64)]) -> LaurentPoly {
    LaurentPoly::from_terms(terms)
}

fn lp_rows(rows: [[&[(i32, i64, i64)]; 4]; 4]) -> Mat<LaurentPoly> {
    Mat::from_fn(4, |i, j| lp(rows[i][j]))
}

fn m_symbolic() -> Mat<LaurentPoly> {
    lp_rows([
        [&[(0, 1, 1)], &[], &[(0, 1, 1)], &[(1, 1, 2), (0, -1, 1)]],
        [&[], &[(0, 1, 1)], &[(0, 1, 1)], &[(1, 1, 2)]],
        [&[], &[], &[(0, 1, 1)], &[(1, 1, 2), (0, 1, 2)]],
        [&[], &[], &[], &[(0, 1, 1)]],
    ])
}

fn n_symbolic() -> Mat<LaurentPoly> {
    lp_rows([
        [&[(0, 1, 1)], &[], &[], &[]],
        [&[(0, 2, 1), (-1, 2, 1)], &[(0, 1, 1)], &[], &[]],
        [&[(0, 2, 1)], &[(0, 1, 1)], &[(0, 1, 1)], &[]],
        [&[(0, 1, 1)], &[(0, 1, 1)], &[], &[(0, 1, 1)]],
    ])
}

fn j_symbolic() -> Mat<LaurentPoly> {
    // s = u + u^-1
    let a: &[(i32, i64, i64)] = &[(0, 1, 1), (1, 1, 2), (-1, 1, 2)];
    let na: &[(i32, i64, i64)] = &[(0, -1, 1), (1, -1, 2), (-1, -1, 2)];
    let b: &[(i32, i64, i64)] = &[(0, 4, 1), (1, 2, 1), (-1, 2, 1)];
    let nb: &[(i32, i64, i64)] = &[(0, -4, 1), (1, -2, 1), (-1, -2, 1)];
    lp_rows([
        [a, na, &[(0, 1, 1), (1, 1, 1)], &[(0, -3, 1), (1, -2, 1), (-1, -2, 1), (-2, -1, 1)]],
        [na, a, &[(0, -1, 1), (1, -1, 1)], &[(0, 1, 1), (1, 1, 1)]],
        [&[(0, 1, 1), (-1, 1, 1)], &[(0, -1, 1), (-1, -1, 1)], b, nb],
        [&[(0, -3, 1), (1, -2, 1), (-1, -2, 1), (2, -1, 1)], &[(0, 1, 1), (-1, 1, 1)], nb, b],
    ])
}

/// The printed closed form of the image of the longitude.
pub fn l_printed() -> Mat<LaurentPoly> {
    lp_rows([
        [
            &[(1, 1, 2), (0, -1, 2), (-1, -1, 2), (-2, -1, 2)],
            &[(1, 1, 2), (0, 1, 2), (-1, 1, 2), (-2, 1, 2)],
            &[(0, -1, 1), (-2, -1, 1)],
            &[(1, 5, 2), (0, 3, 1), (-1, 1, 1), (-2, 3, 2)],
        ],
        [
            &[(1, 1, 2), (0, -1, 2), (-1, -1, 2), (-2, -1, 2), (-3, -1, 1)],
            &[(1, 1, 2), (0, 1, 2), (-1, 1, 2), (-2, 1, 2), (-3, 1, 1)],
            &[(0, 1, 1), (-1, -2, 1), (-2, 1, 1), (-3, -2, 1)],
            &[(1, 7, 2), (0, 2, 1), (-1, 5, 1), (-2, 1, 2), (-3, 3, 1)],
        ],
        [&[], &[], &[(1, 1, 1)], &[]],
        [&[], &[], &[], &[(1, 1, 1)]],
    ])
}

pub fn m_word() -> Word {
    Word::gen("m")
}

pub fn n_word() -> Word {
    Word::gen("n")
}

/// Longitude `n m^-1 n^-1 m^2 n^-1 m^-1 n`.
pub fn l_word() -> Word {
    Word::letters("nMNmmNMn")
}

/// The nine trace words with their traces.
pub fn printed_trace_words() -> Vec<(Word, LaurentPoly)> {
    [
        ("m", lp(&[(0, 4, 1)])),
        ("n", lp(&[(0, 4, 1)])),
        ("mn", lp(&[(0, 6, 1), (1, 1, 1)])),
        ("mN", lp(&[(0, 3, 1)])),
        ("mnm", lp(&[(0, 9, 1), (1, 3, 1)])),
        ("mNm", lp(&[(0, 3, 1), (-1, 1, 1)])),
        ("mnMN", lp(&[(0, 3, 1)])),
        ("mnmN", lp(&[(0, 6, 1), (-1, 1, 1)])),
        ("mNmn", lp(&[(0, 6, 1), (-1, 1, 1)])),
    ]
    .into_iter()
    .map(|(w, t)| (Word::letters(w), t))
    .collect()
}

#[derive(Debug, Clone)]
pub struct Fig8Family<T> {
    pub m: Mat<T>,
    pub n: Mat<T>,
    pub j: HermForm<T>,
    /// Commutator convention under which the relator closes.
    pub convention: CommutatorConvention,
}

impl<T: Backend + std::fmt::Display> Fig8Family<T> {
    pub fn rep(&self) -> Result<Rep<T>, WordError> {
        Rep::new([("m", self.m.clone()), ("n", self.n.clone())])
    }

    fn verify(&self, tol: f64) -> Result<(), Fig8Error> {
        for g in [&self.m, &self.n] {
            let defect = form_defect_matrix(g, &self.j, FormConvention::TransposeConj)?;
            if !T::negligible(&defect, tol) {
                return Err(Fig8Error::Transcription("generator does not preserve J"));
            }
        }
        let pres = builtin_presentation_with(Builtin::Figure8, self.convention)?;
        if !check_relations(&self.rep()?, &pres, tol)?.all_linear() {
            return Err(Fig8Error::Transcription("relator does not close"));
        }
        Ok(())
    }
}

impl Fig8Family<LaurentPoly> {
    /// Symbolic family over `Q[u, u^-1]`, checked exactly.
    pub fn symbolic() -> Result<Self, Fig8Error> {
        let j = HermForm::exact(j_symbolic()).map_err(|_| Fig8Error::Transcription("J is not Hermitian"))?;
        let mut fam = Fig8Family { m: m_symbolic(), n: n_symbolic(), j, convention: CommutatorConvention::Standard };
        if fam.verify(0.0).is_err() {
            fam.convention = CommutatorConvention::Inverse;
            fam.verify(0.0)?;
        }
        Ok(fam)
    }

    /// Numeric instance at `u = e^{i alpha}`, checked at `1e-10`.
    pub fn at(&self, alpha: &Angle) -> Result<Fig8Family<CScalar>, Fig8Error> {
        let fam = Fig8Family {
            m: self.m.eval_unit(alpha),
            n: self.n.eval_unit(alpha),
            j: self.j.eval_unit(alpha)?,
            convention: self.convention,
        };
        fam.verify(NUMERIC_TOL)?;
        Ok(fam)
    }

    /// Largest coefficient denominator among the entries of `M` and `N`.
    pub fn entry_denominators(&self) -> (u64, u64) {
        let den = |m: &Mat<LaurentPoly>| {
            m.entries()
                .map(|p| u64::try_from(p.denominator()).unwrap_or(u64::MAX))
                .fold(1, num_integer::lcm)
        };
        (den(&self.m), den(&self.n))
    }
}

/// `-4 (cos a + 1)^2 (2 cos a + 1)^3`.
pub fn det_j_closed(alpha: &Angle) -> f64 {
    let c = alpha.cos_sin().0;
    -4.0 * (c + 1.0).powi(2) * (2.0 * c + 1.0).powi(3)
}

/// `|closed - direct| / max(1, |closed|)`; the closed form has zeros where
/// a purely relative error is meaningless.
pub fn det_j_agreement(j: &HermForm<CScalar>, alpha: &Angle) -> f64 {
    let closed = det_j_closed(alpha);
    let direct = j.matrix().det();
    (direct - CScalar::new(closed, 0.0)).norm() / closed.abs().max(1.0)
}

/// Reduces to `(-pi, pi]`.
fn principal(alpha: f64) -> f64 {
    let x = alpha.rem_euclid(2.0 * PI);
    if x > PI {
        x - 2.0 * PI
    } else {
        x
    }
}

/// Expected signature of `J_u`, or `None` within `eps` of `±2pi/3` or `pi`.
pub fn expected_signature(alpha: f64, eps: f64) -> Option<Signature> {
    let a = principal(alpha).abs();
    let edge = 2.0 * PI / 3.0;
    if (a - edge).abs() <= eps || PI - a <= eps {
        None
    } else if a < edge {
        Some(Signature::new(3, 1, 0))
    } else {
        Some(Signature::new(2, 2, 0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignatureRow {
    pub alpha: f64,
    pub signature: Signature,
    pub expected: Option<Signature>,
}

/// Signature of `J_u` over a grid; fails on the first point outside the
/// exclusion zones whose signature is not the expected one.
pub fn signature_sweep(fam: &Fig8Family<LaurentPoly>, alphas: &[f64], eps: f64, tol: f64) -> Result<Vec<SignatureRow>, Fig8Error> {
    alphas
        .iter()
        .map(|&alpha| {
            let j = fam.j.eval_unit(&Angle::radians(alpha))?;
            let signature = herm_signature(&j, tol);
            let expected = expected_signature(alpha, eps);
            match expected {
                Some(e) if e != signature => Err(Fig8Error::Signature { alpha, got: signature, expected: e }),
                _ => Ok(SignatureRow { alpha, signature, expected }),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParabolicityReport {
    pub m: IsoClass,
    pub l: IsoClass,
    pub m_margin: f64,
    pub l_margin: f64,
    pub l_spectrum: Vec<EigenCluster>,
    /// Spectrum of `L` is `{u (x3), u^-3}` at `1e-6`.
    pub spectrum_matches: bool,
}

/// Classifies the meridian and the longitude in the `SU(3,1)` regime.
pub fn parabolicity_report(fam: &Fig8Family<LaurentPoly>, alpha: &Angle, tol: f64) -> Result<ParabolicityReport, Fig8Error> {
    let a = principal(alpha.to_radians());
    if a.abs() >= 2.0 * PI / 3.0 {
        return Err(Fig8Error::OutsideRegime(a));
    }
    let num = fam.at(alpha)?;
    let form = HermForm::numeric(num.j.matrix().star())?;
    let m = classify_detailed(&num.m, &form, tol)?;
    let l_mat = eval_word(&num.rep()?, &l_word())?;
    let l = classify_detailed(&l_mat, &form, tol)?;
    let u = alpha.unit();
    let spectrum_matches = spectrum_close(&l.eigen.clusters, &[u, u, u, alpha.unit_pow(-3)], 1e-6);
    Ok(ParabolicityReport {
        m: m.class,
        l: l.class,
        m_margin: m.eigen.margin(),
        l_margin: l.eigen.margin(),
        l_spectrum: l.eigen.clusters,
        spectrum_matches,
    })
}

/// Whether the clusters carry the multiset `expected` (values within `tol`
/// of each other are grouped first).
fn spectrum_close(clusters: &[EigenCluster], expected: &[CScalar], tol: f64) -> bool {
    let mut groups: Vec<(CScalar, usize)> = Vec::new();
    for &z in expected {
        match groups.iter_mut().find(|(v, _)| (*v - z).norm() <= tol) {
            Some(g) => g.1 += 1,
            None => groups.push((z, 1)),
        }
    }
    groups.len() == clusters.len()
        && groups
            .iter()
            .all(|(v, k)| clusters.iter().any(|c| c.algebraic == *k && (c.value - v).norm() <= tol))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub word: Word,
    pub trace: LaurentPoly,
    pub integral: bool,
    /// Printed value, for the built-in words.
    pub expected: Option<LaurentPoly>,
}

impl TraceEntry {
    pub fn passes(&self) -> bool {
        self.integral && self.expected.as_ref().is_none_or(|e| *e == self.trace)
    }
}

/// Traces of the built-in words followed by `extra`.
pub fn trace_integrality_check(fam: &Fig8Family<LaurentPoly>, extra: &[Word]) -> Result<Vec<TraceEntry>, Fig8Error> {
    let rep = fam.rep()?;
    let builtin = printed_trace_words().into_iter().map(|(w, t)| (w, Some(t)));
    builtin
        .chain(extra.iter().map(|w| (w.clone(), None)))
        .map(|(word, expected)| {
            let trace = trace_word(&rep, &word)?;
            Ok(TraceEntry { integral: in_z_laurent(&trace), word, trace, expected })
        })
        .collect()
}

/// Exact identities independent of `u`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolicChecks {
    pub convention: CommutatorConvention,
    pub relation: bool,
    pub form_m: bool,
    pub form_n: bool,
    pub l_transcription: bool,
    pub peripheral_commute: bool,
    pub det_l_one: bool,
    pub traces: Vec<TraceEntry>,
    /// Trace of `l m`.
    pub trace_lm: LaurentPoly,
    pub denominators: BTreeMap<String, u64>,
}

impl SymbolicChecks {
    pub fn passed(&self) -> bool {
        self.relation
            && self.form_m
            && self.form_n
            && self.l_transcription
            && self.peripheral_commute
            && self.det_l_one
            && in_z_laurent(&self.trace_lm)
            && self.traces.iter().all(TraceEntry::passes)
    }
}

pub fn symbolic_checks(fam: &Fig8Family<LaurentPoly>, extra: &[Word]) -> Result<SymbolicChecks, Fig8Error> {
    let rep = fam.rep()?;
    let pres = builtin_presentation_with(Builtin::Figure8, fam.convention)?;
    let relation = check_relations(&rep, &pres, 0.0)?.all_linear();
    let form = |g: &Mat<LaurentPoly>| -> Result<bool, Fig8Error> {
        Ok(form_defect_matrix(g, &fam.j, FormConvention::TransposeConj)?.is_zero())
    };
    let l = eval_word(&rep, &l_word())?;
    let ml = fam.m.try_mul(&l)?;
    let lm = l.try_mul(&fam.m)?;
    let (dm, dn) = fam.entry_denominators();
    Ok(SymbolicChecks {
        convention: fam.convention,
        relation,
        form_m: form(&fam.m)?,
        form_n: form(&fam.n)?,
        l_transcription: l == l_printed(),
        peripheral_commute: ml == lm,
        det_l_one: l.det().is_one(),
        traces: trace_integrality_check(fam, extra)?,
        trace_lm: lm.trace(),
        denominators: BTreeMap::from([("M".to_string(), dm), ("N".to_string(), dn)]),
    })
}

/// Points where the trace ring is discrete: `u` a 1st, 2nd, 3rd, 4th or
/// 6th root of unity.
pub fn is_special_point(alpha: &Angle) -> bool {
    match alpha {
        Angle::PiFraction(r) => [1, 2, 3].contains(r.denom()),
        Angle::RationalRadians(_) | Angle::Radians(_) => alpha.is_zero_mod_2pi(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classes {
    pub m: IsoClass,
    pub l: IsoClass,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig8Checks {
    pub symbolic: bool,
    pub signature: bool,
    pub det_closed_form: bool,
    /// `None` outside the `SU(3,1)` regime.
    pub parabolic_preserving: Option<bool>,
    pub spectrum: Option<bool>,
}

/// Full report at one parameter value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig8Report {
    pub family: &'static str,
    pub alpha: Angle,
    pub signature: Signature,
    pub expected_signature: Option<Signature>,
    pub det_j: f64,
    pub det_j_closed: f64,
    pub det_rel_error: f64,
    pub classes: Option<Classes>,
    pub classification_error: Option<String>,
    pub traces: BTreeMap<String, LaurentPoly>,
    pub symbolic: SymbolicChecks,
    pub annotation: Option<&'static str>,
    pub checks: Fig8Checks,
    pub passed: bool,
}

pub fn figure8_report(alpha: &Angle, extra: &[Word], tol: f64) -> Result<Fig8Report, Fig8Error> {
    let fam = Fig8Family::symbolic()?;
    let sym = symbolic_checks(&fam, extra)?;
    let num = fam.at(alpha)?;
    let a = alpha.to_radians();
    let signature = herm_signature(&num.j, tol);
    let expected = expected_signature(a, 0.01);
    let det_j = num.j.matrix().det().re;
    let det_rel_error = det_j_agreement(&num.j, alpha);

    let in_regime = principal(a).abs() < 2.0 * PI / 3.0;
    let (classes, classification_error, parabolic, spectrum) = if in_regime {
        match parabolicity_report(&fam, alpha, tol) {
            Ok(r) => {
                let ok = r.m.is_unipotent() && r.l.is_parabolic();
                (Some(Classes { m: r.m, l: r.l }), None, Some(ok), Some(r.spectrum_matches))
            }
            Err(e) => (None, Some(e.to_string()), Some(false), None),
        }
    } else {
        (None, None, None, None)
    };

    let checks = Fig8Checks {
        symbolic: sym.passed(),
        signature: expected.is_none_or(|e| e == signature),
        det_closed_form: det_rel_error <= 1e-9,
        parabolic_preserving: parabolic,
        spectrum,
    };
    let passed = checks.symbolic
        && checks.signature
        && checks.det_closed_form
        && checks.parabolic_preserving != Some(false)
        && checks.spectrum != Some(false);
    let annotation = (is_special_point(alpha) && sym.traces.iter().all(|t| t.integral))
        .then_some("integral traces at a root of unity of order 1, 2, 3, 4 or 6");
    Ok(Fig8Report {
        family: "figure8",
        alpha: *alpha,
        signature,
        expected_signature: expected,
        det_j,
        det_j_closed: det_j_closed(alpha),
        det_rel_error,
        classes,
        classification_error,
        traces: sym.traces.iter().map(|t| (t.word.to_string(), t.trace.clone())).collect(),
        symbolic: sym,
        annotation,
        checks,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isometry::ParabolicKind;

    #[test]
    fn undeformed_is_real() {
        let fam = Fig8Family::symbolic().unwrap();
        let one = fam.at(&Angle::ZERO).unwrap();
        let col: Vec<f64> = (0..4).map(|i| one.m.get(i, 3).re).collect();
        assert_eq!(col, vec![-0.5, 0.5, 1.0, 1.0]);
        assert!(one.m.entries().chain(one.n.entries()).all(|z| z.im == 0.0));
        assert_eq!(herm_signature(&one.j, 1e-9), Signature::new(3, 1, 0));
    }

    #[test]
    fn trace_mn() {
        let fam = Fig8Family::symbolic().unwrap();
        let t = trace_word(&fam.rep().unwrap(), &Word::letters("mn")).unwrap();
        assert_eq!(t, lp(&[(0, 6, 1), (1, 1, 1)]));
    }

    #[test]
    fn longitude_entry() {
        let fam = Fig8Family::symbolic().unwrap();
        let l = eval_word(&fam.rep().unwrap(), &l_word()).unwrap();
        assert_eq!(*l.get(0, 2), lp(&[(0, -1, 1), (-2, -1, 1)]));
        assert_eq!(l, l_printed());
    }

    #[test]
    fn det_closed_zeros() {
        assert!(det_j_closed(&Angle::pi_frac(2, 3)).abs() < 1e-15);
        assert_eq!(det_j_closed(&Angle::pi_frac(1, 1)), 0.0);
        let fam = Fig8Family::symbolic().unwrap();
        let j = fam.j.eval_unit(&Angle::ZERO).unwrap();
        assert!(det_j_agreement(&j, &Angle::ZERO) < 1e-12);
    }

    #[test]
    fn signature_points() {
        assert_eq!(expected_signature(PI / 4.0, 0.01), Some(Signature::new(3, 1, 0)));
        assert_eq!(expected_signature(3.0 * PI / 4.0, 0.01), Some(Signature::new(2, 2, 0)));
        assert_eq!(expected_signature(2.0 * PI / 3.0, 0.01), None);
        let fam = Fig8Family::symbolic().unwrap();
        let rows = signature_sweep(&fam, &[0.0, PI / 4.0, 3.0 * PI / 4.0, -3.0 * PI / 4.0], 0.01, 1e-9).unwrap();
        assert_eq!(rows[3].signature, Signature::new(2, 2, 0));
    }

    #[test]
    fn parabolic_at_pi_over_5() {
        let fam = Fig8Family::symbolic().unwrap();
        let r = parabolicity_report(&fam, &Angle::pi_frac(1, 5), 1e-9).unwrap();
        assert!(r.m.is_unipotent());
        assert_eq!(r.l, IsoClass::Parabolic(ParabolicKind::EllipticParabolic));
        assert!(r.spectrum_matches);
    }

    #[test]
    fn longitude_at_i_merges() {
        let fam = Fig8Family::symbolic().unwrap();
        let r = parabolicity_report(&fam, &Angle::pi_frac(1, 2), 1e-9).unwrap();
        assert!(r.l.is_parabolic());
        assert_eq!(r.l_spectrum.len(), 1);
        assert!(r.spectrum_matches);
    }

    #[test]
    fn undeformed_unipotent() {
        let fam = Fig8Family::symbolic().unwrap();
        let r = parabolicity_report(&fam, &Angle::ZERO, 1e-9).unwrap();
        assert!(r.m.is_unipotent() && r.l.is_unipotent());
    }

    #[test]
    fn outer_arc_refused() {
        let fam = Fig8Family::symbolic().unwrap();
        assert!(matches!(parabolicity_report(&fam, &Angle::pi_frac(3, 4), 1e-9), Err(Fig8Error::OutsideRegime(_))));
    }

    #[test]
    fn builtin_traces() {
        let fam = Fig8Family::symbolic().unwrap();
        let r = trace_integrality_check(&fam, &[Word::gen("m").pow(2)]).unwrap();
        assert_eq!(r.len(), 10);
        assert!(r.iter().all(TraceEntry::passes));
        assert_eq!(r[9].trace, lp(&[(0, 4, 1)]));
    }

    #[test]
    fn full_report_passes() {
        let r = figure8_report(&Angle::radians(0.5), &[], 1e-9).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.classes.unwrap().m, IsoClass::Parabolic(ParabolicKind::UnipotentStep3));
    }
}
