//! Solvability of finite sets of L0 comparisons over the standard real
//! structure, with every variable and parameter ranging over `[0,1]`.

pub mod eval;
pub mod grid;
pub mod refute;
pub mod smt;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use indexmap::IndexSet;
use thiserror::Error;

use crate::kset::Interval;
use crate::ratio::{rat, Rational};
use crate::term::{Comparison, Symbol};

use eval::{certainly_false, eval_span, holds_exact, Endpoints, Span};

pub use grid::grid_search;
pub use refute::refute;
pub use smt::encode;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstraintError {
    #[error("constraint `{0}` is not an L0-formula")]
    NotL0(String),
}

/// A finite set of L0 comparisons together with the values of the
/// complement endpoints `c_i-`, `c_i+`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintSet {
    atoms: Vec<Comparison>,
    endpoints: Endpoints,
}

impl ConstraintSet {
    /// `complement` gives the intervals `J_1, J_2, …` whose endpoints the
    /// constants `c_i-`, `c_i+` denote. Duplicate atoms are dropped.
    pub fn new(
        atoms: impl IntoIterator<Item = Comparison>,
        complement: &[Interval],
    ) -> Result<Self, ConstraintError> {
        let ends = Endpoints(complement.iter().map(|j| (j.lo().clone(), j.hi().clone())).collect());
        Self::with_endpoints(atoms, ends)
    }

    pub fn with_endpoints(
        atoms: impl IntoIterator<Item = Comparison>,
        endpoints: Endpoints,
    ) -> Result<Self, ConstraintError> {
        let mut seen = IndexSet::new();
        for c in atoms {
            if !c.is_l0() {
                return Err(ConstraintError::NotL0(c.to_string()));
            }
            seen.insert(c);
        }
        Ok(ConstraintSet { atoms: seen.into_iter().collect(), endpoints })
    }

    /// Like [`ConstraintSet::new`] but keeps comparisons over interpreted
    /// terms. Such a set is only meaningful to [`refute`], which bounds
    /// those terms by what every continuous t-norm allows.
    pub fn relaxation(atoms: impl IntoIterator<Item = Comparison>, complement: &[Interval]) -> Self {
        let ends = Endpoints(complement.iter().map(|j| (j.lo().clone(), j.hi().clone())).collect());
        let atoms: IndexSet<Comparison> = atoms.into_iter().collect();
        ConstraintSet { atoms: atoms.into_iter().collect(), endpoints: ends }
    }

    pub fn atoms(&self) -> &[Comparison] {
        &self.atoms
    }

    pub fn endpoints(&self) -> &Endpoints {
        &self.endpoints
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        for c in &self.atoms {
            c.lhs.symbols_into(&mut out);
            c.rhs.symbols_into(&mut out);
        }
        out
    }

    /// Whether `sol` satisfies every atom. Exact solutions are checked in
    /// rational arithmetic; approximate ones pass an atom unless it is
    /// false for every point within the declared tolerance.
    pub fn accepts(&self, sol: &Solution) -> bool {
        match &sol.exactness {
            Exactness::Exact => {
                let lookup = |s: &Symbol| sol.get(s);
                self.atoms
                    .iter()
                    .all(|c| holds_exact(c, &self.endpoints, &lookup) == Some(true))
            }
            Exactness::Approximate { tolerance } => {
                let lookup = |s: &Symbol| match sol.get(s) {
                    Some(v) => Span::new(v - tolerance, v + tolerance),
                    None => Span::top(),
                };
                self.atoms.iter().all(|c| {
                    let l = eval_span(&c.lhs, &self.endpoints, &lookup);
                    let r = eval_span(&c.rhs, &self.endpoints, &lookup);
                    !certainly_false(c.op, &l, &r)
                })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Exactness {
    Exact,
    /// Values are within `tolerance` of an exact solution.
    Approximate { tolerance: Rational },
}

impl Exactness {
    pub fn approximate() -> Self {
        Exactness::Approximate { tolerance: rat(1, 1_000_000_000) }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Exactness::Exact)
    }
}

/// An assignment σ of the variables and ρ of the parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub sigma: BTreeMap<String, Rational>,
    pub rho: BTreeMap<String, Rational>,
    pub exactness: Exactness,
}

impl Solution {
    pub fn exact() -> Self {
        Solution { sigma: BTreeMap::new(), rho: BTreeMap::new(), exactness: Exactness::Exact }
    }

    pub fn get(&self, s: &Symbol) -> Option<&Rational> {
        match s {
            Symbol::Var(v) => self.sigma.get(v),
            Symbol::Param(p) => self.rho.get(p),
        }
    }

    pub fn set(&mut self, s: &Symbol, v: Rational) {
        match s {
            Symbol::Var(name) => self.sigma.insert(name.clone(), v),
            Symbol::Param(name) => self.rho.insert(name.clone(), v),
        };
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolverResult {
    Sat(Solution),
    Unsat,
    Unknown(String),
}

impl SolverResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolverResult::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, SolverResult::Unsat)
    }
}

/// Environment variable naming the default SMT solver command.
pub const SMT_CMD_ENV: &str = "BLSAT_SMT_CMD";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmtConfig {
    /// Program and arguments; the problem is written to its stdin.
    pub command: Vec<String>,
    pub timeout: Duration,
}

impl Default for SmtConfig {
    fn default() -> Self {
        let command = std::env::var(SMT_CMD_ENV)
            .ok()
            .filter(|s| !s.trim().is_empty())
            .unwrap_or_else(|| "z3 -in".to_string());
        SmtConfig::new(&command)
    }
}

impl SmtConfig {
    pub fn new(command: &str) -> Self {
        SmtConfig {
            command: command.split_whitespace().map(str::to_string).collect(),
            timeout: Duration::from_secs(10),
        }
    }

    /// Whether the configured solver answers a trivial query.
    pub fn available(&self) -> bool {
        let e = ConstraintSet::with_endpoints(Vec::new(), Endpoints::default())
            .expect("empty set is L0");
        matches!(smt::solve(&e, self), SolverResult::Sat(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridConfig {
    pub denominator: u32,
    /// Upper bound on partial assignments visited before giving up.
    pub max_assignments: u64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { denominator: 4, max_assignments: 2_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Backend {
    Smt(SmtConfig),
    Grid(GridConfig),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub backend: Backend,
    /// Box budget of the interval refuter run before the backend.
    pub refute_boxes: usize,
}

impl SolverConfig {
    pub fn grid() -> Self {
        SolverConfig { backend: Backend::Grid(GridConfig::default()), refute_boxes: 64 }
    }

    pub fn smt() -> Self {
        SolverConfig { backend: Backend::Smt(SmtConfig::default()), refute_boxes: 16 }
    }

    pub fn is_complete(&self) -> bool {
        matches!(self.backend, Backend::Smt(_))
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig::grid()
    }
}

/// Decides `e`: a cheap sound refutation first, then the backend. Any
/// `Sat` returned has passed [`ConstraintSet::accepts`].
pub fn check_constraints(e: &ConstraintSet, config: &SolverConfig) -> SolverResult {
    if refute(e, config.refute_boxes) {
        return SolverResult::Unsat;
    }
    let result = match &config.backend {
        Backend::Grid(g) => grid::grid_search_with(e, g),
        Backend::Smt(s) => smt::solve(e, s),
    };
    match result {
        SolverResult::Sat(sol) if !e.accepts(&sol) => {
            SolverResult::Unknown("backend solution failed the self-check".into())
        }
        other => other,
    }
}
