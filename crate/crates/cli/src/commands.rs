use std::fs;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use cuspdeform::bending::{u_class_ok, validate_d, verify_bianchi_so41, verify_bianchi_su31, BianchiFamily, BianchiParam, Target};
use cuspdeform::figure8::{expected_signature, figure8_report, parabolicity_report, Fig8Family};
use cuspdeform::heisenberg::{enumerate_orbit, min_gap, siegel_form, write_orbit_csv, HeisPoint, MAX_RADIUS};
use cuspdeform::isometry::classify_detailed;
use cuspdeform::matform::{herm_signature, EigenData};
use cuspdeform::words::parse_word_list;
use cuspdeform::{Angle, CMat, CScalar, HermForm, LaurentPoly};

use crate::args::{BianchiVerifyArgs, ClassifyArgs, Cli, Command, ConventionArg, Fig8VerifyArgs, OrbitArgs, SweepFamily, TargetArg, VerifyFamily};
use crate::{failure, usage, CliError, Outcome};

pub fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Verify { family: VerifyFamily::Figure8(a) } => verify_figure8(a, cli.tol, out),
        Command::Verify { family: VerifyFamily::Bianchi(a) } => verify_bianchi(a, cli.tol, out),
        Command::Sweep { family: SweepFamily::Figure8 { grid, exclude } } => sweep_figure8(&grid.points(), *exclude, cli.tol, out),
        Command::Sweep { family: SweepFamily::Bianchi { d, target, grid } } => {
            sweep_bianchi(*d, (*target).into(), &grid.points(), cli.tol, out)
        }
        Command::Orbit(a) => orbit(a, out),
        Command::Classify(a) => classify(a, cli.tol, out),
    }
}

fn write_json<T: Serialize>(value: &T, out: &mut dyn Write) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(failure)?;
    writeln!(out)?;
    Ok(())
}

fn verify_figure8(a: &Fig8VerifyArgs, tol: f64, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let extra = match &a.words {
        Some(path) => parse_word_list(&fs::read_to_string(path)?).map_err(usage)?,
        None => Vec::new(),
    };
    if let Some(s) = extra.iter().flat_map(|w| w.symbols()).find(|s| !matches!(*s, "m" | "n")) {
        return Err(usage(format!("unknown generator {s:?} in word list (expected m, n)")));
    }
    let report = figure8_report(&a.alpha, &extra, tol).map_err(failure)?;
    write_json(&report, out)?;
    Ok(Outcome::from_passed(report.passed))
}

fn verify_bianchi(a: &BianchiVerifyArgs, tol: f64, out: &mut dyn Write) -> Result<Outcome, CliError> {
    validate_d(a.d).map_err(usage)?;
    let report = match a.target {
        TargetArg::Su31 => {
            if a.theta.is_some() || a.pythagorean.is_some() {
                return Err(usage("--theta and --pythagorean apply to --target so41"));
            }
            let alpha = if a.u_exact { None } else { a.alpha };
            verify_bianchi_su31(a.d, alpha, tol)
        }
        TargetArg::So41 => {
            if a.u_exact || a.alpha.is_some() {
                return Err(usage("--u-exact and --alpha apply to --target su31"));
            }
            let param = match (a.theta, a.pythagorean) {
                (Some(t), None) => BianchiParam::Theta(t),
                (None, Some(s)) => BianchiParam::Pythagorean(s),
                _ => return Err(usage("--target so41 needs exactly one of --theta or --pythagorean")),
            };
            verify_bianchi_so41(a.d, param, tol)
        }
    }
    .map_err(failure)?;
    write_json(&report, out)?;
    Ok(Outcome::from_passed(report.passed))
}

fn write_csv<T: Serialize>(rows: &[T], out: &mut dyn Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(failure)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct Fig8Row {
    alpha: f64,
    signature: String,
    expected_signature: String,
    class_m: String,
    class_l: String,
    margin_m: Option<f64>,
    margin_l: Option<f64>,
    det_j: f64,
    det_closed: f64,
    det_rel_error: f64,
    pass: bool,
}

fn fig8_row(fam: &Fig8Family<LaurentPoly>, x: f64, exclude: f64, tol: f64) -> Result<Fig8Row, CliError> {
    let alpha = Angle::radians(x);
    let num = fam.at(&alpha).map_err(failure)?;
    let signature = herm_signature(&num.j, tol);
    let expected = expected_signature(x, exclude);
    let det_rel_error = cuspdeform::figure8::det_j_agreement(&num.j, &alpha);
    let mut pass = expected.is_none_or(|e| e == signature) && det_rel_error <= 1e-9;
    let (mut class_m, mut class_l, mut margin_m, mut margin_l) = (String::new(), String::new(), None, None);
    if x.abs() < 2.0 * std::f64::consts::PI / 3.0 {
        match parabolicity_report(fam, &alpha, tol) {
            Ok(r) => {
                pass &= r.m.is_unipotent() && r.l.is_parabolic();
                class_m = r.m.tag().to_string();
                class_l = r.l.tag().to_string();
                margin_m = Some(r.m_margin);
                margin_l = Some(r.l_margin);
            }
            Err(_) => {
                pass = false;
                class_m = "indeterminate".into();
                class_l = "indeterminate".into();
            }
        }
    }
    Ok(Fig8Row {
        alpha: x,
        signature: signature.to_string(),
        expected_signature: expected.map_or(String::new(), |s| s.to_string()),
        class_m,
        class_l,
        margin_m,
        margin_l,
        det_j: num.j.matrix().det().re,
        det_closed: cuspdeform::figure8::det_j_closed(&alpha),
        det_rel_error,
        pass,
    })
}

fn sweep_figure8(points: &[f64], exclude: f64, tol: f64, out: &mut dyn Write) -> Result<Outcome, CliError> {
    if !(exclude >= 0.0) {
        return Err(usage("--exclude must be nonnegative"));
    }
    let fam = Fig8Family::symbolic().map_err(failure)?;
    let kept: Vec<f64> = points.iter().copied().filter(|&x| expected_signature(x, exclude).is_some()).collect();
    let rows = kept
        .par_iter()
        .map(|&x| fig8_row(&fam, x, exclude, tol))
        .collect::<Result<Vec<_>, _>>()?;
    write_csv(&rows, out)?;
    Ok(Outcome::from_passed(rows.iter().all(|r| r.pass)))
}

#[derive(Debug, Serialize)]
struct BianchiRow {
    param: f64,
    class_u: String,
    margin: Option<f64>,
    trace_re: f64,
    trace_im: f64,
    form_defect: Option<f64>,
    pass: bool,
    note: String,
}

fn bianchi_row(u: &CMat, form: &HermForm<CScalar>, d: u32, target: Target, x: f64, tol: f64) -> BianchiRow {
    let tr = u.trace();
    let undeformed = Angle::radians(x).is_zero_mod_2pi();
    match classify_detailed(u, form, tol) {
        Ok(c) => BianchiRow {
            param: x,
            class_u: c.class.tag().to_string(),
            margin: Some(c.eigen.margin()),
            trace_re: tr.re,
            trace_im: tr.im,
            form_defect: Some(c.form_defect),
            pass: u_class_ok(target, d, undeformed, c.class),
            note: String::new(),
        },
        Err(e) => BianchiRow {
            param: x,
            class_u: "indeterminate".into(),
            margin: None,
            trace_re: tr.re,
            trace_im: tr.im,
            form_defect: None,
            pass: false,
            note: e.to_string(),
        },
    }
}

fn sweep_bianchi(d: u32, target: Target, points: &[f64], tol: f64, out: &mut dyn Write) -> Result<Outcome, CliError> {
    validate_d(d).map_err(usage)?;
    let rows: Vec<BianchiRow> = match target {
        Target::Su31 => {
            let fam = BianchiFamily::su31_symbolic(d).map_err(failure)?;
            points
                .par_iter()
                .map(|&x| {
                    let num = fam.eval_unit(&Angle::radians(x)).map_err(failure)?;
                    Ok(bianchi_row(&num.u, &num.form, d, target, x, tol))
                })
                .collect::<Result<_, CliError>>()?
        }
        Target::So41 => points
            .par_iter()
            .map(|&x| {
                let num = BianchiFamily::so41_at(d, &Angle::radians(x)).map_err(failure)?;
                Ok(bianchi_row(&num.u, &num.form, d, target, x, tol))
            })
            .collect::<Result<_, CliError>>()?,
    };
    write_csv(&rows, out)?;
    Ok(Outcome::from_passed(rows.iter().all(|r| r.pass)))
}

fn orbit(a: &OrbitArgs, out: &mut dyn Write) -> Result<Outcome, CliError> {
    validate_d(a.d).map_err(usage)?;
    if a.radius > MAX_RADIUS {
        return Err(usage(format!("--radius {} exceeds {MAX_RADIUS}", a.radius)));
    }
    let c = |re: f64, im: f64| CScalar::new(re, im);
    let (fam, p0) = match a.target {
        TargetArg::Su31 => {
            let alpha = a.alpha.ok_or_else(|| usage("--target su31 needs --alpha"))?;
            if a.theta.is_some() {
                return Err(usage("--theta applies to --target so41"));
            }
            let p0 = match a.base.as_deref() {
                None => HeisPoint::origin(2),
                Some(&[x1, y1, x2, y2, t]) => HeisPoint::new(vec![c(x1, y1), c(x2, y2)], t),
                Some(_) => return Err(usage("--base takes 5 values for su31")),
            };
            (BianchiFamily::su31_at(a.d, &alpha).map_err(failure)?, p0)
        }
        TargetArg::So41 => {
            let theta = a.theta.ok_or_else(|| usage("--target so41 needs --theta"))?;
            if a.alpha.is_some() {
                return Err(usage("--alpha applies to --target su31"));
            }
            let p0 = match a.base.as_deref() {
                None => HeisPoint::origin(3),
                Some(&[x, y, w]) => HeisPoint::new(vec![c(x, 0.0), c(y, 0.0), c(w, 0.0)], 0.0),
                Some(_) => return Err(usage("--base takes 3 values for so41")),
            };
            (BianchiFamily::so41_at(a.d, &theta).map_err(failure)?, p0)
        }
    };
    let samples = enumerate_orbit(&fam.t, &fam.u, &p0, a.radius).map_err(failure)?;
    let points: Vec<HeisPoint> = samples.iter().map(|s| s.point.clone()).collect();
    write_orbit_csv(&samples, min_gap(&points), out).map_err(failure)?;
    Ok(Outcome::Pass)
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct ClassifyReport {
    n: usize,
    convention: &'static str,
    class: Option<String>,
    form_defect: Option<f64>,
    eigen: Option<EigenData>,
    error: Option<String>,
    passed: bool,
}

fn parse_entry(v: &serde_json::Value) -> Option<CScalar> {
    match v {
        serde_json::Value::Number(x) => Some(CScalar::new(x.as_f64()?, 0.0)),
        serde_json::Value::Array(p) if p.len() == 2 => Some(CScalar::new(p[0].as_f64()?, p[1].as_f64()?)),
        _ => None,
    }
}

fn parse_matrix(v: &serde_json::Value, what: &str) -> Result<CMat, CliError> {
    let bad = || usage(format!("{what} must be a square array of numbers or [re, im] pairs"));
    let rows = v.as_array().ok_or_else(bad)?;
    let rows: Vec<Vec<CScalar>> = rows
        .iter()
        .map(|r| r.as_array().ok_or_else(bad)?.iter().map(|e| parse_entry(e).ok_or_else(bad)).collect())
        .collect::<Result<_, _>>()?;
    CMat::from_rows(rows).map_err(usage)
}

fn classify(a: &ClassifyArgs, tol: f64, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let text = fs::read_to_string(&a.matrix)?;
    let doc: serde_json::Value = serde_json::from_str(&text).map_err(usage)?;
    let m = parse_matrix(doc.get("matrix").ok_or_else(|| usage("missing \"matrix\""))?, "matrix")?;
    let j = match doc.get("form") {
        Some(f) => parse_matrix(f, "form")?,
        None => siegel_form::<CScalar>(m.n()).matrix().clone(),
    };
    if j.n() != m.n() {
        return Err(usage("matrix and form sizes differ"));
    }
    // g^T J conj(g) = J is g* conj(J) g = conj(J)
    let (j, convention) = match a.convention {
        ConventionArg::ConjTranspose => (j, "conj-transpose"),
        ConventionArg::TransposeConj => (j.star(), "transpose-conj"),
    };
    let form = HermForm::numeric(j).map_err(usage)?;
    let report = match classify_detailed(&m, &form, tol) {
        Ok(c) => ClassifyReport {
            n: m.n(),
            convention,
            class: Some(c.class.tag().to_string()),
            form_defect: Some(c.form_defect),
            eigen: Some(c.eigen),
            error: None,
            passed: true,
        },
        Err(e) => ClassifyReport {
            n: m.n(),
            convention,
            class: None,
            form_defect: None,
            eigen: None,
            error: Some(e.to_string()),
            passed: false,
        },
    };
    write_json(&report, out)?;
    Ok(Outcome::from_passed(report.passed))
}
