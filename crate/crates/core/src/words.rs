//! Free words, finite presentations and their representations.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::matform::{Backend, FormConvention, HermForm, Mat, MatError};
use crate::scalars::LaurentPoly;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WordError {
    #[error("cannot parse word factor {0:?}")]
    Parse(String),
    #[error("line {line}: {message}")]
    WordList { line: usize, message: String },
    #[error("generator {0:?} is not declared")]
    UnknownSymbol(String),
    #[error("generator images have dimensions {0} and {1}")]
    DimensionMismatch(usize, usize),
    #[error("generator {0:?} does not preserve the form")]
    FormNotPreserved(String),
    #[error("no built-in presentation named {0:?}")]
    UnknownPresentation(String),
    #[error(transparent)]
    Mat(#[from] MatError),
}

/// Freely reduced word: adjacent factors carry different symbols and no
/// exponent is zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    factors: Vec<(String, i64)>,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    pub fn gen(sym: &str) -> Self {
        Word { factors: vec![(sym.to_string(), 1)] }
    }

    pub fn from_factors<S: Into<String>>(factors: impl IntoIterator<Item = (S, i64)>) -> Self {
        let mut w = Word::identity();
        for (s, e) in factors {
            w.push(s.into(), e);
        }
        w
    }

    /// Compact notation: each letter a generator, uppercase its inverse
    /// (`"mnMN"` is `m n m^-1 n^-1`).
    pub fn letters(s: &str) -> Self {
        Word::from_factors(s.chars().filter(|c| !c.is_whitespace()).map(|c| {
            if c.is_uppercase() {
                (c.to_lowercase().to_string(), -1)
            } else {
                (c.to_string(), 1)
            }
        }))
    }

    fn push(&mut self, sym: String, exp: i64) {
        if exp == 0 {
            return;
        }
        match self.factors.last_mut() {
            Some((s, e)) if *s == sym => {
                *e += exp;
                if *e == 0 {
                    self.factors.pop();
                }
            }
            _ => self.factors.push((sym, exp)),
        }
    }

    pub fn factors(&self) -> &[(String, i64)] {
        &self.factors
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    /// Sum of absolute exponents.
    pub fn length(&self) -> u64 {
        self.factors.iter().map(|(_, e)| e.unsigned_abs()).sum()
    }

    pub fn inverse(&self) -> Self {
        Word::from_factors(self.factors.iter().rev().map(|(s, e)| (s.clone(), -e)))
    }

    pub fn concat(&self, other: &Word) -> Self {
        let mut w = self.clone();
        for (s, e) in &other.factors {
            w.push(s.clone(), *e);
        }
        w
    }

    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        (0..k.unsigned_abs()).fold(Word::identity(), |acc, _| acc.concat(&base))
    }

    /// Cyclic rotation by `k` letters (factors of exponent `e` count `|e|`).
    pub fn rotate(&self, k: usize) -> Self {
        let letters: Vec<(String, i64)> = self
            .factors
            .iter()
            .flat_map(|(s, e)| std::iter::repeat_n((s.clone(), e.signum()), e.unsigned_abs() as usize))
            .collect();
        if letters.is_empty() {
            return Word::identity();
        }
        let k = k % letters.len();
        Word::from_factors(letters[k..].iter().chain(&letters[..k]).cloned())
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.factors.iter().map(|(s, _)| s.as_str())
    }
}

/// `[a, b]` under the chosen convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum CommutatorConvention {
    /// `a b a^-1 b^-1`
    #[default]
    #[serde(rename = "aba^-1b^-1")]
    Standard,
    /// `a^-1 b^-1 a b`
    #[serde(rename = "a^-1b^-1ab")]
    Inverse,
}

pub fn commutator(a: &Word, b: &Word, conv: CommutatorConvention) -> Word {
    match conv {
        CommutatorConvention::Standard => a.concat(b).concat(&a.inverse()).concat(&b.inverse()),
        CommutatorConvention::Inverse => a.inverse().concat(&b.inverse()).concat(a).concat(b),
    }
}

/// `m.n^-1.m`; the identity prints as `1`.
impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(s, e)| if *e == 1 { s.clone() } else { format!("{s}^{e}") })
            .collect();
        write!(f, "{}", parts.join("."))
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Factors `sym^exp` (or bare `sym`) separated by `.`; `1` or an empty
/// string is the identity.
impl FromStr for Word {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "1" {
            return Ok(Word::identity());
        }
        let mut factors = Vec::new();
        for tok in s.split('.') {
            let tok = tok.trim();
            let (sym, exp) = match tok.split_once('^') {
                Some((sym, e)) => (sym.trim(), e.trim().parse::<i64>().map_err(|_| WordError::Parse(tok.into()))?),
                None => (tok, 1),
            };
            let valid = !sym.is_empty() && sym.chars().all(|c| c.is_alphanumeric() || c == '_');
            if !valid || exp == 0 {
                return Err(WordError::Parse(tok.into()));
            }
            factors.push((sym.to_string(), exp));
        }
        Ok(Word::from_factors(factors))
    }
}

/// Word list: one word per line, `#` starts a comment.
pub fn parse_word_list(text: &str) -> Result<Vec<Word>, WordError> {
    text.lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let body = line.split('#').next().unwrap_or("").trim();
            (!body.is_empty()).then(|| {
                body.parse::<Word>()
                    .map_err(|e| WordError::WordList { line: i + 1, message: e.to_string() })
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Relator {
    pub name: String,
    pub word: Word,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Presentation {
    pub name: String,
    pub generators: Vec<String>,
    pub relators: Vec<Relator>,
}

impl Presentation {
    pub fn new(name: &str, generators: &[&str], relators: Vec<(String, Word)>) -> Result<Self, WordError> {
        let generators: Vec<String> = generators.iter().map(|s| s.to_string()).collect();
        for (_, w) in &relators {
            if let Some(bad) = w.symbols().find(|s| !generators.iter().any(|g| g == s)) {
                return Err(WordError::UnknownSymbol(bad.to_string()));
            }
        }
        Ok(Presentation {
            name: name.to_string(),
            generators,
            relators: relators.into_iter().map(|(name, word)| Relator { name, word }).collect(),
        })
    }
}

/// Presentations shipped with the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Figure8,
    Bianchi(u32),
}

impl FromStr for Builtin {
    type Err = WordError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        if t == "figure8" {
            return Ok(Builtin::Figure8);
        }
        t.strip_prefix("bianchi")
            .map(|r| r.trim_matches(|c| c == '(' || c == ')' || c == '-' || c == '_'))
            .and_then(|r| r.parse().ok())
            .map(Builtin::Bianchi)
            .ok_or_else(|| WordError::UnknownPresentation(s.to_string()))
    }
}

/// `w = [n, m^-1]` of the figure-eight presentation.
pub fn figure8_w(conv: CommutatorConvention) -> Word {
    commutator(&Word::gen("n"), &Word::gen("m").inverse(), conv)
}

pub fn builtin_presentation(which: Builtin) -> Result<Presentation, WordError> {
    builtin_presentation_with(which, CommutatorConvention::Standard)
}

pub fn builtin_presentation_with(which: Builtin, conv: CommutatorConvention) -> Result<Presentation, WordError> {
    match which {
        Builtin::Figure8 => {
            let w = figure8_w(conv);
            let rel = Word::gen("m").concat(&w).concat(&Word::gen("n").inverse()).concat(&w.inverse());
            Presentation::new("figure8", &["m", "n"], vec![("mwn^-1w^-1".into(), rel)])
        }
        Builtin::Bianchi(d) => {
            let last = match d {
                2 => ("(au^-1au)^2", Word::letters("aUau").pow(2)),
                7 => ("(atu^-1au)^2", Word::letters("atUau").pow(2)),
                11 => ("(atu^-1au)^3", Word::letters("atUau").pow(3)),
                _ => return Err(WordError::UnknownPresentation(format!("bianchi({d})"))),
            };
            Presentation::new(
                &format!("bianchi({d})"),
                &["a", "t", "u"],
                vec![
                    ("[t,u]".into(), commutator(&Word::gen("t"), &Word::gen("u"), conv)),
                    ("a^2".into(), Word::gen("a").pow(2)),
                    ("(at)^3".into(), Word::letters("at").pow(3)),
                    (last.0.into(), last.1),
                ],
            )
        }
    }
}

/// Generator images, with an optional invariant form.
#[derive(Debug, Clone)]
pub struct Rep<T> {
    images: BTreeMap<String, (Mat<T>, Mat<T>)>,
    n: usize,
    form: Option<(HermForm<T>, FormConvention)>,
}

impl<T: Backend> Rep<T> {
    pub fn new<S: Into<String>>(images: impl IntoIterator<Item = (S, Mat<T>)>) -> Result<Self, WordError> {
        let mut map = BTreeMap::new();
        let mut n = None;
        for (s, m) in images {
            match n {
                None => n = Some(m.n()),
                Some(k) if k != m.n() => return Err(WordError::DimensionMismatch(k, m.n())),
                _ => {}
            }
            let inv = m.inverse()?;
            map.insert(s.into(), (m, inv));
        }
        let n = n.ok_or(MatError::Empty)?;
        Ok(Rep { images: map, n, form: None })
    }

    /// Attaches an invariant form after checking every generator, exactly
    /// for exact backends and at `tol` otherwise.
    pub fn with_form(mut self, form: HermForm<T>, conv: FormConvention, tol: f64) -> Result<Self, WordError> {
        for (s, (m, _)) in &self.images {
            let defect = crate::matform::form_defect_matrix(m, &form, conv)?;
            if !T::negligible(&defect, tol) {
                return Err(WordError::FormNotPreserved(s.clone()));
            }
        }
        self.form = Some((form, conv));
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn form(&self) -> Option<&(HermForm<T>, FormConvention)> {
        self.form.as_ref()
    }

    pub fn image(&self, sym: &str) -> Result<&Mat<T>, WordError> {
        self.images.get(sym).map(|p| &p.0).ok_or_else(|| WordError::UnknownSymbol(sym.to_string()))
    }

    pub fn generators(&self) -> impl Iterator<Item = (&str, &Mat<T>)> {
        self.images.iter().map(|(s, p)| (s.as_str(), &p.0))
    }

    /// Same representation with one generator image replaced.
    pub fn replace(&self, sym: &str, m: Mat<T>) -> Result<Self, WordError> {
        if !self.images.contains_key(sym) {
            return Err(WordError::UnknownSymbol(sym.to_string()));
        }
        if m.n() != self.n {
            return Err(WordError::DimensionMismatch(self.n, m.n()));
        }
        let mut out = self.clone();
        let inv = m.inverse()?;
        out.images.insert(sym.to_string(), (m, inv));
        out.form = None;
        Ok(out)
    }
}

pub fn eval_word<T: Backend>(rep: &Rep<T>, w: &Word) -> Result<Mat<T>, WordError> {
    let mut acc = Mat::identity(rep.n);
    for (s, e) in w.factors() {
        let (m, inv) = rep.images.get(s).ok_or_else(|| WordError::UnknownSymbol(s.clone()))?;
        let base = if *e < 0 { inv } else { m };
        for _ in 0..e.unsigned_abs() {
            acc = acc.try_mul(base)?;
        }
    }
    Ok(acc)
}

pub fn trace_word<T: Backend>(rep: &Rep<T>, w: &Word) -> Result<T, WordError> {
    Ok(eval_word(rep, w)?.trace())
}

/// Membership in `Z[u, u^-1]`.
pub fn in_z_laurent(p: &LaurentPoly) -> bool {
    p.is_integral()
}

/// Outcome for one relator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelatorCheck {
    pub name: String,
    pub word: Word,
    /// Evaluates to the identity.
    pub linear_pass: bool,
    /// Evaluates to a scalar multiple of the identity.
    pub projective_pass: bool,
    /// The scalar, when the projective check passes.
    pub scalar: Option<String>,
    /// Largest entry of `R - I` (numeric backends).
    pub linear_defect: Option<f64>,
    /// Largest entry of `R - (tr R / n) I` (numeric backends).
    pub projective_defect: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationReport {
    pub presentation: String,
    pub exact: bool,
    pub relators: Vec<RelatorCheck>,
}

impl RelationReport {
    pub fn all_linear(&self) -> bool {
        self.relators.iter().all(|r| r.linear_pass)
    }

    pub fn all_projective(&self) -> bool {
        self.relators.iter().all(|r| r.projective_pass)
    }
}

/// Checks every relator, exactly for exact backends and at `tol` for floats.
pub fn check_relations<T: Backend + fmt::Display>(
    rep: &Rep<T>,
    pres: &Presentation,
    tol: f64,
) -> Result<RelationReport, WordError> {
    let id = Mat::<T>::identity(rep.n);
    let mut out = Vec::with_capacity(pres.relators.len());
    for rel in &pres.relators {
        let r = eval_word(rep, &rel.word)?;
        let lin = r.try_sub(&id)?;
        let lambda = r.trace().mul_ref(&T::from_int(rep.n as i64).unit_inverse().ok_or(MatError::Singular)?);
        let proj = r.try_sub(&id.scale(&lambda))?;
        let projective_pass = T::negligible(&proj, tol);
        out.push(RelatorCheck {
            name: rel.name.clone(),
            word: rel.word.clone(),
            linear_pass: T::negligible(&lin, tol),
            projective_pass,
            scalar: projective_pass.then(|| lambda.to_string()),
            linear_defect: T::size(&lin),
            projective_defect: T::size(&proj),
        });
    }
    Ok(RelationReport { presentation: pres.name.clone(), exact: T::EXACT, relators: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::CScalar;

    #[test]
    fn reduction() {
        let w = Word::from_factors([("m", 1), ("m", -1), ("n", 2), ("n", 1)]);
        assert_eq!(w.factors(), &[("n".to_string(), 3)]);
        assert!(Word::letters("mnNM").is_identity());
        assert_eq!(Word::letters("ab").concat(&Word::letters("BA")), Word::identity());
    }

    #[test]
    fn parse_and_display() {
        let w: Word = "m^1.n^-1.m^1".parse().unwrap();
        assert_eq!(w, Word::letters("mNm"));
        assert_eq!(w.to_string(), "m.n^-1.m");
        assert_eq!(w.to_string().parse::<Word>().unwrap(), w);
        assert!("m^0".parse::<Word>().is_err());
        assert!("m^x".parse::<Word>().is_err());
        let list = parse_word_list("# header\nm\n\nm.n # trailing\n").unwrap();
        assert_eq!(list, vec![Word::gen("m"), Word::letters("mn")]);
        assert!(matches!(parse_word_list("m\nm^^2"), Err(WordError::WordList { line: 2, .. })));
    }

    #[test]
    fn builtin_shapes() {
        let f = builtin_presentation(Builtin::Figure8).unwrap();
        assert_eq!(f.generators, vec!["m", "n"]);
        assert_eq!(f.relators[0].word, Word::letters("mnMNmNMnmN"));
        let b7 = builtin_presentation("bianchi(7)".parse().unwrap()).unwrap();
        assert_eq!(b7.relators.len(), 4);
        assert_eq!(b7.relators[3].word, Word::letters("atUau").pow(2));
        assert!(builtin_presentation(Builtin::Bianchi(5)).is_err());
    }

    #[test]
    fn empty_word_is_identity() {
        let rep = Rep::new([("m", Mat::<CScalar>::from_real(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap())]).unwrap();
        assert_eq!(eval_word(&rep, &Word::identity()).unwrap(), Mat::identity(2));
        assert!(matches!(eval_word(&rep, &Word::gen("x")), Err(WordError::UnknownSymbol(_))));
    }
}
