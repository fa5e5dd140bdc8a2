use cuspdeform::bending::BianchiFamily;
use cuspdeform::figure8::Fig8Family;
use cuspdeform::heisenberg::{boundary_action, dilation, heis_mul, stab_matrix, HeisPoint, StabKind};
use cuspdeform::isometry::classify;
use cuspdeform::matform::{eigenvalues, herm_signature};
use cuspdeform::scalars::EvalUnit;
use cuspdeform::words::{eval_word, trace_word, Word};
use cuspdeform::{Angle, CMat, CScalar, ExtScalar, HermForm, LaurentPoly, Mat, Ring};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> CScalar {
    CScalar::new(re, im)
}

fn laurent() -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec((-3i32..=3, -5i64..=5, 1i64..=4), 0..5).prop_map(|t| LaurentPoly::from_terms(&t))
}

fn ext(d: u32) -> impl Strategy<Value = ExtScalar> {
    [laurent(), laurent(), laurent(), laurent()].prop_map(move |c| ExtScalar::new(d, c).unwrap())
}

fn ext_triple() -> impl Strategy<Value = (ExtScalar, ExtScalar, ExtScalar)> {
    prop::sample::select(vec![2u32, 5, 7, 11]).prop_flat_map(|d| (ext(d), ext(d), ext(d)))
}

fn angle() -> impl Strategy<Value = Angle> {
    prop_oneof![
        (-12i64..=12, 1i64..=12).prop_map(|(p, q)| Angle::pi_frac(p, q)),
        (-4.0f64..4.0).prop_map(Angle::radians),
    ]
}

fn cscalar(r: f64) -> impl Strategy<Value = CScalar> {
    (-r..r, -r..r).prop_map(|(a, b)| c(a, b))
}

fn cmat(n: usize, r: f64) -> impl Strategy<Value = CMat> {
    prop::collection::vec(cscalar(r), n * n).prop_map(move |v| CMat::from_fn(n, |i, j| v[i * n + j]))
}

fn heis_point(k: usize) -> impl Strategy<Value = HeisPoint> {
    (prop::collection::vec(cscalar(2.0), k), -2.0f64..2.0).prop_map(|(z, t)| HeisPoint::new(z, t))
}

fn word(max: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(prop::sample::select(vec!['m', 'n', 'M', 'N']), 0..=max)
        .prop_map(|v| Word::letters(&v.into_iter().collect::<String>()))
}

fn bianchi_word(max: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(prop::sample::select(vec!['a', 't', 'u', 'T', 'U']), 0..=max)
        .prop_map(|v| Word::letters(&v.into_iter().collect::<String>()))
}

fn close(a: &HeisPoint, b: &HeisPoint, tol: f64) -> bool {
    let scale = 1.0 + a.t.abs() + a.z.iter().map(|z| z.norm()).sum::<f64>();
    a.z.iter().zip(&b.z).all(|(x, y)| (x - y).norm() <= tol * scale) && (a.t - b.t).abs() <= tol * scale
}

/// A stabilizer element of `p_inf` in the Siegel model of size 4.
fn stabilizer() -> impl Strategy<Value = CMat> {
    prop_oneof![
        heis_point(2).prop_map(|p| stab_matrix(&StabKind::Translation(p)).unwrap()),
        (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b)| {
            let rot = CMat::diag(vec![CScalar::from_polar(1.0, a), CScalar::from_polar(1.0, b)]);
            stab_matrix(&StabKind::Rotation(rot)).unwrap()
        }),
        (0.5f64..2.0).prop_map(|r| dilation(4, r).unwrap()),
    ]
}

proptest! {
    #[test]
    fn laurent_ring_axioms(a in laurent(), b in laurent(), x in laurent()) {
        prop_assert_eq!(a.mul_ref(&b).mul_ref(&x), a.mul_ref(&b.mul_ref(&x)));
        prop_assert_eq!(a.add_ref(&b).add_ref(&x), a.add_ref(&b.add_ref(&x)));
        prop_assert_eq!(a.mul_ref(&b.add_ref(&x)), a.mul_ref(&b).add_ref(&a.mul_ref(&x)));
        prop_assert_eq!(a.mul_ref(&b), b.mul_ref(&a));
        prop_assert_eq!(a.add_ref(&b), b.add_ref(&a));
        prop_assert!(a.sub_ref(&a).is_zero());
        prop_assert_eq!(a.mul_ref(&LaurentPoly::one()), a.clone());
        prop_assert_eq!(a.star().star(), a.clone());
        prop_assert_eq!(a.mul_ref(&b).star(), a.star().mul_ref(&b.star()));
    }

    #[test]
    fn ext_ring_axioms((a, b, x) in ext_triple()) {
        prop_assert_eq!(a.mul_ref(&b).mul_ref(&x), a.mul_ref(&b.mul_ref(&x)));
        prop_assert_eq!(a.add_ref(&b).add_ref(&x), a.add_ref(&b.add_ref(&x)));
        prop_assert_eq!(a.mul_ref(&b.add_ref(&x)), a.mul_ref(&b).add_ref(&a.mul_ref(&x)));
        prop_assert_eq!(a.mul_ref(&b), b.mul_ref(&a));
        prop_assert!(a.sub_ref(&a).is_zero());
        prop_assert_eq!(a.mul_ref(&ExtScalar::one()), a.clone());
    }

    #[test]
    fn ext_eval_is_homomorphism((a, b, _x) in ext_triple(), alpha in angle()) {
        let (ea, eb) = (a.eval_unit(&alpha), b.eval_unit(&alpha));
        let prod = ea * eb;
        prop_assert!((a.mul_ref(&b).eval_unit(&alpha) - prod).norm() <= 1e-12 * (1.0 + prod.norm()));
    }

    #[test]
    fn star_is_conjugation(a in laurent(), alpha in angle()) {
        let lhs = a.star().eval_unit(&alpha);
        let rhs = a.eval_unit(&alpha).conj();
        prop_assert!((lhs - rhs).norm() <= 1e-12, "{lhs} vs {rhs}");
    }

    #[test]
    fn eval_is_homomorphism(a in laurent(), b in laurent(), alpha in angle()) {
        let prod = a.eval_unit(&alpha) * b.eval_unit(&alpha);
        let direct = a.mul_ref(&b).eval_unit(&alpha);
        prop_assert!((direct - prod).norm() <= 1e-12 * (1.0 + prod.norm()));
    }

    #[test]
    fn signature_is_congruence_invariant(
        signs in prop::collection::vec((any::<bool>(), 1.0f64..3.0), 4),
        e in cmat(4, 0.2),
    ) {
        let j = CMat::diag(signs.iter().map(|&(pos, s)| c(if pos { s } else { -s }, 0.0)).collect());
        let p = CMat::identity(4).try_add(&e).unwrap();
        let pjp = p.adjoint().try_mul(&j).unwrap().try_mul(&p).unwrap();
        // symmetrize away rounding
        let pjp = pjp.try_add(&pjp.adjoint()).unwrap().scale(&c(0.5, 0.0));
        let before = herm_signature(&HermForm::numeric(j).unwrap(), 1e-9);
        let after = herm_signature(&HermForm::numeric(pjp).unwrap(), 1e-9);
        prop_assert_eq!(before, after);
    }

    #[test]
    fn eigenvalue_product_is_det(a in cmat(4, 2.0)) {
        let det = a.det();
        prop_assume!(det.norm() > 1e-3);
        let prod: CScalar = eigenvalues(&a).unwrap().into_iter().product();
        prop_assert!((prod - det).norm() <= 1e-8 * det.norm(), "{prod} vs {det}");
    }

    #[test]
    fn exact_and_numeric_det_agree(entries in prop::collection::vec(laurent(), 9), alpha in angle()) {
        let m = Mat::from_fn(3, |i, j| entries[i * 3 + j].clone());
        let exact = m.det().eval_unit(&alpha);
        let numeric = m.eval_unit(&alpha).det();
        prop_assert!((exact - numeric).norm() <= 1e-9 * exact.norm().max(1.0), "{exact} vs {numeric}");
    }

    #[test]
    fn heisenberg_group_law(p in heis_point(2), q in heis_point(2), r in heis_point(2)) {
        let left = heis_mul(&heis_mul(&p, &q).unwrap(), &r).unwrap();
        let right = heis_mul(&p, &heis_mul(&q, &r).unwrap()).unwrap();
        prop_assert!(close(&left, &right, 1e-12));
        prop_assert_eq!(heis_mul(&p, &HeisPoint::origin(2)).unwrap(), p.clone());
        prop_assert!(close(&heis_mul(&p, &p.inverse()).unwrap(), &HeisPoint::origin(2), 1e-12));

        let tp = stab_matrix(&StabKind::Translation(p.clone())).unwrap();
        let tq = stab_matrix(&StabKind::Translation(q.clone())).unwrap();
        let tpq = stab_matrix(&StabKind::Translation(heis_mul(&p, &q).unwrap())).unwrap();
        prop_assert!(tp.try_mul(&tq).unwrap().max_abs_diff(&tpq).unwrap() <= 1e-12 * (1.0 + tpq.max_abs()));
    }

    #[test]
    fn boundary_action_composes(gs in prop::collection::vec(stabilizer(), 1..=6), p in heis_point(2)) {
        let g = gs.iter().fold(CMat::identity(4), |acc, h| acc.try_mul(h).unwrap());
        let all_at_once = boundary_action(&g, &p).unwrap();
        let step = gs.iter().rev().fold(p.clone(), |q, h| boundary_action(h, &q).unwrap());
        prop_assert!(close(&all_at_once, &step, 1e-10), "{all_at_once:?} vs {step:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn classification_is_conjugation_invariant(
        gs in prop::collection::vec(stabilizer(), 1..=3),
        which in 0usize..4,
        phase in -3.0f64..3.0,
    ) {
        let form = HermForm::numeric(cuspdeform::heisenberg::siegel_form::<CScalar>(4).matrix().clone()).unwrap();
        let fam = BianchiFamily::su31_at(7, &Angle::pi_frac(2, 5)).unwrap();
        let lox = dilation(4, 2.0).unwrap().try_mul(&stab_matrix(&StabKind::Rotation(CMat::diag(vec![c(0.0, 1.0), c(1.0, 0.0)]))).unwrap()).unwrap();
        let a = [fam.u.clone(), fam.t.clone(), fam.a.clone(), lox][which].clone();
        let g = gs.iter().fold(CMat::identity(4), |acc, h| acc.try_mul(h).unwrap());
        let conj = g.try_mul(&a).unwrap().try_mul(&g.inverse().unwrap()).unwrap();
        let base = classify(&a, &form, 1e-8).unwrap();
        prop_assert_eq!(classify(&conj, &form, 1e-8).unwrap(), base);
        let scaled = a.scale(&CScalar::from_polar(1.0, phase));
        prop_assert_eq!(classify(&scaled, &form, 1e-8).unwrap(), base);
    }

    #[test]
    fn word_evaluation_is_homomorphism(w1 in word(8), w2 in word(8)) {
        let rep = Fig8Family::symbolic().unwrap().rep().unwrap();
        let lhs = eval_word(&rep, &w1.concat(&w2)).unwrap();
        let rhs = eval_word(&rep, &w1).unwrap().try_mul(&eval_word(&rep, &w2).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn trace_cyclic_and_inverse(w in word(8), k in 0usize..8) {
        let rep = Fig8Family::symbolic().unwrap().rep().unwrap();
        let tr = trace_word(&rep, &w).unwrap();
        prop_assert_eq!(trace_word(&rep, &w.rotate(k)).unwrap(), tr.clone());
        prop_assert_eq!(trace_word(&rep, &w.inverse()).unwrap(), tr.star());
    }

    #[test]
    fn bianchi_trace_cyclic_and_inverse(w in bianchi_word(6), k in 0usize..6) {
        let rep = BianchiFamily::su31_symbolic(7).unwrap().rep().unwrap();
        let tr = trace_word(&rep, &w).unwrap();
        prop_assert_eq!(trace_word(&rep, &w.rotate(k)).unwrap(), tr.clone());
        prop_assert_eq!(trace_word(&rep, &w.inverse()).unwrap(), tr.star());
    }
}
