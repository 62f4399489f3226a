//! Continuous t-norms as ordinal sums of Łukasiewicz and Product
//! components, the truth-value evaluator, and the models read off open
//! tableau branches.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::Formula;
use crate::kset::KSet;
use crate::ratio::{format_rational, int, one, parse_rational, rat, zero, Rational};
use crate::solver::{Exactness, Solution};
use crate::tableau::{explore, ComponentChain, ExploreConfig, Exploration, Label, Verdict};
use crate::term::TranslationMap;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("value {0} lies outside [0,1]")]
    OutOfRange(String),
    #[error("component [{0}, {1}] is empty or outside [0,1]")]
    BadComponent(String, String),
    #[error("components [{0}] and [{1}] overlap")]
    Overlap(String, String),
    #[error("no value for atom `{0}`")]
    MissingAtom(String),
    #[error("no value for parameter `{0}`")]
    MissingParameter(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ComponentKind {
    #[serde(rename = "L")]
    Lukasiewicz,
    #[serde(rename = "P")]
    Product,
}

impl From<Label> for ComponentKind {
    fn from(l: Label) -> Self {
        match l {
            Label::L => ComponentKind::Lukasiewicz,
            Label::P => ComponentKind::Product,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Component {
    pub lo: Rational,
    pub hi: Rational,
    pub kind: ComponentKind,
}

impl Component {
    fn holds(&self, x: &Rational, y: &Rational) -> bool {
        *x >= self.lo && *x <= self.hi && *y >= self.lo && *y <= self.hi
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            ComponentKind::Lukasiewicz => "L",
            ComponentKind::Product => "P",
        };
        write!(f, "{k}[{}, {}]", format_rational(&self.lo), format_rational(&self.hi))
    }
}

/// An ordinal sum; the minimum t-norm outside its components.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct OrdinalSum {
    components: Vec<Component>,
}

impl OrdinalSum {
    /// Sorts and validates: each `0 <= lo < hi <= 1`, interiors disjoint.
    pub fn new(mut components: Vec<Component>) -> Result<Self, ModelError> {
        components.sort();
        components.dedup();
        for c in &components {
            if !(zero() <= c.lo && c.lo < c.hi && c.hi <= one()) {
                return Err(ModelError::BadComponent(format_rational(&c.lo), format_rational(&c.hi)));
            }
        }
        for w in components.windows(2) {
            if w[1].lo < w[0].hi {
                return Err(ModelError::Overlap(w[0].to_string(), w[1].to_string()));
            }
        }
        Ok(OrdinalSum { components })
    }

    pub fn minimum() -> Self {
        OrdinalSum::default()
    }

    pub fn lukasiewicz(lo: Rational, hi: Rational) -> Self {
        OrdinalSum::new(vec![Component { lo, hi, kind: ComponentKind::Lukasiewicz }]).expect("valid component")
    }

    pub fn product(lo: Rational, hi: Rational) -> Self {
        OrdinalSum::new(vec![Component { lo, hi, kind: ComponentKind::Product }]).expect("valid component")
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    fn shared(&self, x: &Rational, y: &Rational) -> Option<&Component> {
        self.components.iter().find(|c| c.holds(x, y))
    }
}

impl fmt::Display for OrdinalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return f.write_str("min");
        }
        let parts: Vec<String> = self.components.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(" + "))
    }
}

fn check_unit(v: &Rational) -> Result<(), ModelError> {
    if *v < zero() || *v > one() {
        Err(ModelError::OutOfRange(format_rational(v)))
    } else {
        Ok(())
    }
}

pub fn tnorm_apply(t: &OrdinalSum, x: &Rational, y: &Rational) -> Result<Rational, ModelError> {
    check_unit(x)?;
    check_unit(y)?;
    Ok(tnorm_unchecked(t, x, y))
}

fn tnorm_unchecked(t: &OrdinalSum, x: &Rational, y: &Rational) -> Rational {
    match t.shared(x, y) {
        Some(Component { lo: a, hi: b, kind: ComponentKind::Lukasiewicz }) => (x + y - b).max(a.clone()),
        Some(Component { lo: a, hi: b, kind: ComponentKind::Product }) => a + (x - a) * (y - a) / (b - a),
        None => x.min(y).clone(),
    }
}

pub fn residuum_apply(t: &OrdinalSum, x: &Rational, y: &Rational) -> Result<Rational, ModelError> {
    check_unit(x)?;
    check_unit(y)?;
    Ok(residuum_unchecked(t, x, y))
}

fn residuum_unchecked(t: &OrdinalSum, x: &Rational, y: &Rational) -> Rational {
    if x <= y {
        return one();
    }
    match t.shared(x, y) {
        Some(Component { lo: _, hi: b, kind: ComponentKind::Lukasiewicz }) => b - x + y,
        Some(Component { lo: a, hi: b, kind: ComponentKind::Product }) => a + (y - a) * (b - a) / (x - a),
        None => y.clone(),
    }
}

fn delta(x: &Rational) -> Rational {
    if *x == one() {
        one()
    } else {
        zero()
    }
}

/// A t-norm with a valuation of the atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractedModel {
    pub tnorm: OrdinalSum,
    pub valuation: BTreeMap<String, Rational>,
    pub exactness: Exactness,
}

/// Serialized form of a model; rationals are written `p/q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub components: Vec<ComponentRecord>,
    pub valuation: BTreeMap<String, String>,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub lo: String,
    pub hi: String,
    pub kind: ComponentKind,
}

impl ExtractedModel {
    pub fn new(tnorm: OrdinalSum, valuation: BTreeMap<String, Rational>) -> Self {
        ExtractedModel { tnorm, valuation, exactness: Exactness::Exact }
    }

    pub fn record(&self) -> ModelRecord {
        ModelRecord {
            components: self
                .tnorm
                .components()
                .iter()
                .map(|c| ComponentRecord { lo: format_rational(&c.lo), hi: format_rational(&c.hi), kind: c.kind })
                .collect(),
            valuation: self.valuation.iter().map(|(a, v)| (a.clone(), format_rational(v))).collect(),
            exact: self.exactness.is_exact(),
        }
    }

    pub fn from_record(r: &ModelRecord) -> Option<Self> {
        let components = r
            .components
            .iter()
            .map(|c| Some(Component { lo: parse_rational(&c.lo)?, hi: parse_rational(&c.hi)?, kind: c.kind }))
            .collect::<Option<Vec<_>>>()?;
        let valuation = r
            .valuation
            .iter()
            .map(|(a, v)| Some((a.clone(), parse_rational(v)?)))
            .collect::<Option<BTreeMap<_, _>>>()?;
        Some(ExtractedModel {
            tnorm: OrdinalSum::new(components).ok()?,
            valuation,
            exactness: if r.exact { Exactness::Exact } else { Exactness::approximate() },
        })
    }
}

/// The truth value `V⋆(f)`, exactly.
pub fn evaluate(f: &Formula, m: &ExtractedModel) -> Result<Rational, ModelError> {
    Ok(match f {
        Formula::Atom(p) => {
            let v = m.valuation.get(p).ok_or_else(|| ModelError::MissingAtom(p.clone()))?;
            check_unit(v)?;
            v.clone()
        }
        Formula::Falsum => zero(),
        Formula::Verum => one(),
        Formula::Strong(l, r) => tnorm_unchecked(&m.tnorm, &evaluate(l, m)?, &evaluate(r, m)?),
        Formula::Impl(l, r) => residuum_unchecked(&m.tnorm, &evaluate(l, m)?, &evaluate(r, m)?),
        Formula::Or(l, r) => evaluate(l, m)?.max(evaluate(r, m)?),
        Formula::And(l, r) => evaluate(l, m)?.min(evaluate(r, m)?),
        Formula::Delta(g) => delta(&evaluate(g, m)?),
        Formula::Inv(g) => one() - evaluate(g, m)?,
    })
}

/// Bounds on `V⋆(f)` when every atom value may be off by `tolerance`,
/// for the fixed t-norm of `m`. Uses that the t-norm, `max`, `min` and Δ
/// are monotone, the residuum is antitone in its first argument and
/// monotone in its second, and `∼` is antitone.
pub fn evaluate_range(f: &Formula, m: &ExtractedModel, tolerance: &Rational) -> Result<(Rational, Rational), ModelError> {
    Ok(match f {
        Formula::Atom(p) => {
            let v = m.valuation.get(p).ok_or_else(|| ModelError::MissingAtom(p.clone()))?;
            ((v - tolerance).max(zero()), (v + tolerance).min(one()))
        }
        Formula::Falsum => (zero(), zero()),
        Formula::Verum => (one(), one()),
        Formula::Strong(l, r) => {
            let (a, b) = (evaluate_range(l, m, tolerance)?, evaluate_range(r, m, tolerance)?);
            (tnorm_unchecked(&m.tnorm, &a.0, &b.0), tnorm_unchecked(&m.tnorm, &a.1, &b.1))
        }
        Formula::Impl(l, r) => {
            let (a, b) = (evaluate_range(l, m, tolerance)?, evaluate_range(r, m, tolerance)?);
            (residuum_unchecked(&m.tnorm, &a.1, &b.0), residuum_unchecked(&m.tnorm, &a.0, &b.1))
        }
        Formula::Or(l, r) => {
            let (a, b) = (evaluate_range(l, m, tolerance)?, evaluate_range(r, m, tolerance)?);
            (a.0.max(b.0), a.1.max(b.1))
        }
        Formula::And(l, r) => {
            let (a, b) = (evaluate_range(l, m, tolerance)?, evaluate_range(r, m, tolerance)?);
            (a.0.min(b.0), a.1.min(b.1))
        }
        Formula::Delta(g) => {
            let (lo, hi) = evaluate_range(g, m, tolerance)?;
            (delta(&lo), delta(&hi))
        }
        Formula::Inv(g) => {
            let (lo, hi) = evaluate_range(g, m, tolerance)?;
            (one() - hi, one() - lo)
        }
    })
}

/// Reads the t-norm off the chain and the valuation off σ. Atoms of `m`
/// that σ leaves unassigned get the value 0.
pub fn extract_model(sol: &Solution, chain: &ComponentChain, m: &TranslationMap) -> Result<ExtractedModel, ModelError> {
    let mut components = Vec::new();
    for e in chain.all_components() {
        let a = sol.rho.get(&e.a).ok_or_else(|| ModelError::MissingParameter(e.a.clone()))?;
        let b = sol.rho.get(&e.b).ok_or_else(|| ModelError::MissingParameter(e.b.clone()))?;
        components.push(Component { lo: a.clone(), hi: b.clone(), kind: e.label.into() });
    }
    let tnorm = OrdinalSum::new(components)?;
    let mut valuation = BTreeMap::new();
    for (atom, var) in m.atoms() {
        let v = sol.sigma.get(var).cloned().unwrap_or_else(zero);
        check_unit(&v)?;
        valuation.insert(atom.to_string(), v);
    }
    Ok(ExtractedModel { tnorm, valuation, exactness: sol.exactness.clone() })
}

/// Outcome of checking a model against `Ψ` and `K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub ok: bool,
    /// Formulas whose value is not in `K`, with the value.
    pub failures: Vec<(Formula, Option<Rational>)>,
    /// For approximate models: whether membership also holds for every
    /// valuation within the declared tolerance.
    pub robust: bool,
}

/// Checks `V⋆(ψ) ∈ K` for every ψ. A model with approximate values is
/// checked exactly at its rational values, which are themselves a model;
/// the report also tells whether the whole tolerance box stays in `K`.
pub fn verify_report(psis: &[Formula], k: &KSet, m: &ExtractedModel) -> VerifyReport {
    let mut failures = Vec::new();
    let mut robust = true;
    for psi in psis {
        match evaluate(psi, m) {
            Ok(v) if k.contains(&v).unwrap_or(false) => {}
            Ok(v) => failures.push((psi.clone(), Some(v))),
            Err(_) => failures.push((psi.clone(), None)),
        }
        if let Exactness::Approximate { tolerance } = &m.exactness {
            robust &= matches!(evaluate_range(psi, m, tolerance), Ok((lo, hi)) if k.contains_range(&lo, &hi));
        }
    }
    VerifyReport { ok: failures.is_empty(), failures, robust }
}

pub fn verify_model(psis: &[Formula], k: &KSet, m: &ExtractedModel) -> bool {
    verify_report(psis, k, m).ok
}

/// `Ψ` is `[r,1]`-satisfiable.
pub fn weak_r_sat(psis: &[Formula], r: &Rational, config: &ExploreConfig) -> Exploration {
    let k = KSet::at_least(r.clone()).expect("r in [0,1]");
    explore(psis, &k, config)
}

/// `Ψ` is `{r}`-satisfiable.
pub fn strong_r_sat(psis: &[Formula], r: &Rational, config: &ExploreConfig) -> Exploration {
    let k = KSet::singleton(r.clone()).expect("r in [0,1]");
    explore(psis, &k, config)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DegreeMode {
    Weak,
    Strong,
}

/// A bracket `[lo, hi]` around the supremum of the satisfiable `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeEstimate {
    pub mode: DegreeMode,
    pub lo: Rational,
    pub hi: Rational,
    /// `lo` itself was found satisfiable.
    pub lo_confirmed: bool,
    /// `Some(true)` when the bracket is a point that was found
    /// satisfiable, i.e. the supremum is attained.
    pub attained: Option<bool>,
    /// Bisection is justified only for weak satisfiability, which is
    /// monotone in `r`.
    pub monotone: bool,
    /// Set when an unknown verdict stopped the search early.
    pub aborted: Option<String>,
    pub probes: Vec<(Rational, &'static str)>,
}

fn probe(psis: &[Formula], mode: DegreeMode, r: &Rational, config: &ExploreConfig) -> Verdict {
    match mode {
        DegreeMode::Weak => weak_r_sat(psis, r, config).verdict,
        DegreeMode::Strong => strong_r_sat(psis, r, config).verdict,
    }
}

fn verdict_tag(v: &Verdict) -> &'static str {
    match v {
        Verdict::Satisfiable { .. } => "sat",
        Verdict::Unsatisfiable => "unsat",
        Verdict::Unknown { .. } => "unknown",
    }
}

/// Bisection over `r` until the bracket is at most `tol` wide.
pub fn consistency_degree(psis: &[Formula], mode: DegreeMode, tol: &Rational, config: &ExploreConfig) -> DegreeEstimate {
    assert!(*tol > zero(), "tolerance must be positive");
    let mut est = DegreeEstimate {
        mode,
        lo: zero(),
        hi: one(),
        lo_confirmed: false,
        attained: None,
        monotone: mode == DegreeMode::Weak,
        aborted: None,
        probes: Vec::new(),
    };
    let run = |r: &Rational, est: &mut DegreeEstimate| -> Verdict {
        let v = probe(psis, mode, r, config);
        est.probes.push((r.clone(), verdict_tag(&v)));
        v
    };
    match run(&one(), &mut est) {
        Verdict::Satisfiable { .. } => {
            est.lo = one();
            est.lo_confirmed = true;
            est.attained = Some(true);
            return est;
        }
        Verdict::Unknown { reasons } => {
            est.aborted = Some(format!("r = 1: {}", reasons.join("; ")));
            return est;
        }
        Verdict::Unsatisfiable => {}
    }
    match run(&zero(), &mut est) {
        Verdict::Satisfiable { .. } => est.lo_confirmed = true,
        Verdict::Unsatisfiable if mode == DegreeMode::Weak => {
            // Only an empty K can fail at r = 0; nothing is satisfiable.
            est.hi = zero();
            est.attained = Some(false);
            return est;
        }
        Verdict::Unsatisfiable => {}
        Verdict::Unknown { reasons } => {
            est.aborted = Some(format!("r = 0: {}", reasons.join("; ")));
            return est;
        }
    }
    while &est.hi - &est.lo > *tol {
        let mid = (&est.lo + &est.hi) / int(2);
        match run(&mid, &mut est) {
            Verdict::Satisfiable { .. } => {
                est.lo = mid;
                est.lo_confirmed = true;
            }
            Verdict::Unsatisfiable => est.hi = mid,
            Verdict::Unknown { reasons } => {
                est.aborted = Some(format!("r = {}: {}", format_rational(&mid), reasons.join("; ")));
                break;
            }
        }
    }
    est
}

/// The t-norms tried by [`grid_oracle`] unless told otherwise.
pub fn default_pool() -> Vec<OrdinalSum> {
    let half = rat(1, 2);
    vec![
        OrdinalSum::minimum(),
        OrdinalSum::lukasiewicz(zero(), one()),
        OrdinalSum::product(zero(), one()),
        OrdinalSum::lukasiewicz(zero(), half.clone()),
        OrdinalSum::product(half.clone(), one()),
        OrdinalSum::new(vec![
            Component { lo: zero(), hi: half.clone(), kind: ComponentKind::Lukasiewicz },
            Component { lo: half, hi: one(), kind: ComponentKind::Product },
        ])
        .expect("disjoint components"),
    ]
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleResult {
    Sat(ExtractedModel),
    Unknown,
}

/// Every valuation on the grid `{0, 1/d, …, 1}` against every pooled
/// t-norm. A test oracle only; it never proves unsatisfiability.
pub fn grid_oracle(psis: &[Formula], k: &KSet, d: u32, pool: &[OrdinalSum]) -> OracleResult {
    let mut atoms: Vec<String> = Vec::new();
    for psi in psis {
        for a in psi.atoms() {
            if !atoms.contains(&a) {
                atoms.push(a);
            }
        }
    }
    let d = d.max(1);
    let grid: Vec<Rational> = (0..=d).map(|i| rat(i as i64, d as i64)).collect();
    let total = (grid.len() as u64).pow(atoms.len() as u32);
    for t in pool {
        for code in 0..total {
            let mut rest = code;
            let mut valuation = BTreeMap::new();
            for a in &atoms {
                valuation.insert(a.clone(), grid[(rest % grid.len() as u64) as usize].clone());
                rest /= grid.len() as u64;
            }
            let m = ExtractedModel::new(t.clone(), valuation);
            if verify_model(psis, k, &m) {
                return OracleResult::Sat(m);
            }
        }
    }
    OracleResult::Unknown
}
