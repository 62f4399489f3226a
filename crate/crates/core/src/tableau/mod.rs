//! The K-tableau: root construction, the split rule, the expansion rules for
//! `*`, `=>` and `D`, and depth-first exploration of the branches.

mod cases;
mod expand;
mod explore;

use std::fmt;

use indexmap::IndexSet;
use serde::Serialize;

use crate::formula::Formula;
use crate::kset::{complement_intervals, Interval, KSet};
use crate::solver::{ConstraintError, ConstraintSet};
use crate::term::{eta, interpreted_subterms, translate, Comparison, TableauFormula, Term, TranslationMap};

pub use cases::{component_cases, separation_cases, separation_cases_for, ComponentCase, SeparationCase, SeparationMode};
pub use expand::{expand, expand_with};
pub use explore::{explore, explore_with, ExploreConfig, Exploration, Stats, TraceEdge, Verdict};

/// Kind of a component: Łukasiewicz or Product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Label {
    L,
    P,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::L => "L",
            Label::P => "P",
        })
    }
}

/// A component `[a, b]` named by its two parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChainEntry {
    pub a: String,
    pub b: String,
    pub label: Label,
}

impl ChainEntry {
    pub fn a_term(&self) -> Term {
        Term::param(&self.a)
    }

    pub fn b_term(&self) -> Term {
        Term::param(&self.b)
    }
}

/// The components introduced so far on a branch, in chain order
/// `a_0 < b_0 <= a_1 < … < b_{n-1}`. A component placed by Case 2 gets its
/// own parameters, constrained equal to an existing entry; it is kept as an
/// alias of that entry and does not take part in later case enumeration.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ComponentChain {
    entries: Vec<ChainEntry>,
    aliases: Vec<(ChainEntry, String)>,
    introduced: usize,
}

impl ComponentChain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[ChainEntry] {
        &self.entries
    }

    /// Case-2 components with the `a`-parameter of the entry they equal.
    pub fn aliases(&self) -> &[(ChainEntry, String)] {
        &self.aliases
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Every component ever introduced, entries first.
    pub fn all_components(&self) -> impl Iterator<Item = &ChainEntry> {
        self.entries.iter().chain(self.aliases.iter().map(|(e, _)| e))
    }

    /// Fresh parameter names `a{k}{label}`, `b{k}{label}`.
    fn fresh(&self, label: Label) -> ChainEntry {
        let k = self.introduced;
        ChainEntry { a: format!("a{k}{label}"), b: format!("b{k}{label}"), label }
    }

    fn with_entry_at(&self, index: usize, entry: ChainEntry) -> ComponentChain {
        let mut next = self.clone();
        next.entries.insert(index, entry);
        next.introduced += 1;
        next
    }

    fn with_alias(&self, entry: ChainEntry, of: usize) -> ComponentChain {
        let mut next = self.clone();
        next.aliases.push((entry, self.entries[of].a.clone()));
        next.introduced += 1;
        next
    }

    /// The chain-order comparisons `0 <= a_0 < b_0 <= … < b_{n-1} <= 1`.
    pub fn order_constraints(&self) -> Vec<Comparison> {
        let mut out = Vec::new();
        let mut prev = Term::zero();
        for e in &self.entries {
            out.push(Comparison::le(prev, e.a_term()));
            out.push(Comparison::lt(e.a_term(), e.b_term()));
            prev = e.b_term();
        }
        if !self.entries.is_empty() {
            out.push(Comparison::le(prev, Term::one()));
        }
        out
    }
}

/// Which rule produced a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum RuleTag {
    Root,
    Split,
    StarL,
    StarP,
    StarMin,
    ImplAll,
    ImplL,
    ImplP,
    ImplMin,
    Delta1,
    Delta2,
}

impl RuleTag {
    pub fn tag(self) -> &'static str {
        match self {
            RuleTag::Root => "root",
            RuleTag::Split => "split",
            RuleTag::StarL => "star.L",
            RuleTag::StarP => "star.P",
            RuleTag::StarMin => "star.min",
            RuleTag::ImplAll => "impl.all",
            RuleTag::ImplL => "impl.L",
            RuleTag::ImplP => "impl.P",
            RuleTag::ImplMin => "impl.min",
            RuleTag::Delta1 => "delta.1",
            RuleTag::Delta2 => "delta.2",
        }
    }
}

impl fmt::Display for RuleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CaseTag {
    None,
    /// One of Cases 1–11.
    Case(u8),
    /// The subset `S ⊆ I` chosen by the split rule, 1-based.
    Subset(Vec<usize>),
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseTag::None => Ok(()),
            CaseTag::Case(n) => write!(f, "{n}"),
            CaseTag::Subset(s) => {
                let items: Vec<String> = s.iter().map(ToString::to_string).collect();
                write!(f, "{{{}}}", items.join(","))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Provenance {
    pub rule: RuleTag,
    pub case: CaseTag,
    pub active: Option<Term>,
    pub added: Vec<TableauFormula>,
}

impl Provenance {
    fn root() -> Self {
        Provenance { rule: RuleTag::Root, case: CaseTag::None, active: None, added: Vec::new() }
    }
}

/// The η-formulas of one ψ still waiting for the split rule.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PendingSplit {
    /// Position of ψ in the deduplicated input.
    pub formula: usize,
    /// `η_{J_i}(τ(ψ))` with its 1-based interval index `i`.
    pub etas: Vec<(TableauFormula, usize)>,
}

/// A `min` subrule decision: the operation at `(x, y)` was taken to be
/// `min{x, y}` (for `*`) or `y` (for `=>`). Components created later on the
/// branch may not contradict it, so each decision is rechecked against the
/// final chain at the leaf.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MinDecision {
    pub mode: SeparationMode,
    pub x: Term,
    pub y: Term,
}

impl MinDecision {
    fn replace(&self, target: &Term, replacement: &Term) -> MinDecision {
        MinDecision { mode: self.mode, x: self.x.replace(target, replacement), y: self.y.replace(target, replacement) }
    }

    /// One comparison per component `[a, b]` of `chain`. For `*`: `x` and
    /// `y` are not both inside `(a, b)`. For `=>` (where `y < x`): not
    /// `a <= y` and `x <= b` at once.
    pub fn constraints(&self, chain: &ComponentChain) -> Vec<Comparison> {
        let (x, y) = (&self.x, &self.y);
        chain
            .entries()
            .iter()
            .map(|e| {
                let (a, b) = (e.a_term(), e.b_term());
                match self.mode {
                    SeparationMode::TNorm => Comparison::le(
                        Term::min(
                            Term::min(Term::sub(x.clone(), a.clone()), Term::sub(b.clone(), x.clone())),
                            Term::min(Term::sub(y.clone(), a), Term::sub(b, y.clone())),
                        ),
                        Term::zero(),
                    ),
                    SeparationMode::Residuum => {
                        Comparison::lt(Term::min(Term::sub(y.clone(), a), Term::sub(b, x.clone())), Term::zero())
                    }
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    /// Insertion-ordered; rule applications keep the positions of
    /// rewritten formulas and append new ones.
    pub formulas: IndexSet<TableauFormula>,
    pub chain: ComponentChain,
    pub pending_splits: Vec<PendingSplit>,
    /// Not part of the formula set; rewritten by the same substitutions.
    pub min_decisions: Vec<MinDecision>,
    pub provenance: Provenance,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.pending_splits.is_empty() && self.formulas.iter().all(TableauFormula::is_l0)
    }

    pub fn l0_formulas(&self) -> impl Iterator<Item = &Comparison> {
        self.formulas.iter().filter(|f| f.is_l0()).filter_map(TableauFormula::as_cmp)
    }

    /// `n↾L0` as a constraint set.
    pub fn l0_constraints(&self, complement: &[Interval]) -> Result<ConstraintSet, ConstraintError> {
        ConstraintSet::new(self.l0_formulas().cloned(), complement)
    }

    /// The leaf's constraints together with its `min` decisions checked
    /// against the final chain. Solutions of this set are exactly the ones
    /// whose extracted t-norm agrees with every substitution on the branch.
    pub fn leaf_constraints(&self, complement: &[Interval]) -> Result<ConstraintSet, ConstraintError> {
        let decisions = self.min_decisions.iter().flat_map(|d| d.constraints(&self.chain));
        ConstraintSet::new(self.l0_formulas().cloned().chain(decisions), complement)
    }

    /// Every comparison of the node, interpreted terms included, for
    /// refutation. Pending η-disjunctions are left out.
    pub fn relaxation(&self, complement: &[Interval]) -> ConstraintSet {
        ConstraintSet::relaxation(self.formulas.iter().filter_map(TableauFormula::as_cmp).cloned(), complement)
    }

    /// Number of distinct interpreted subterms; strictly decreases along
    /// every expansion edge.
    pub fn measure(&self) -> usize {
        interpreted_subterms(&self.formulas).len()
    }

    pub fn contains_formula(&self, f: &TableauFormula) -> bool {
        self.formulas.contains(f)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, g) in self.formulas.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{g}")?;
        }
        f.write_str("}")
    }
}

/// `Ψ` with structural duplicates removed, in input order.
pub fn dedup_formulas(psis: &[Formula]) -> Vec<Formula> {
    let set: IndexSet<&Formula> = psis.iter().collect();
    set.into_iter().cloned().collect()
}

/// The root `{η_{J_i}(τ(ψ)) : i ∈ I, ψ ∈ Ψ}`.
pub fn build_root(psis: &[Formula], k: &KSet, m: &mut TranslationMap) -> Node {
    let complement = complement_intervals(k);
    let mut formulas = IndexSet::new();
    let mut pending_splits = Vec::new();
    for (idx, psi) in dedup_formulas(psis).iter().enumerate() {
        let t = translate(psi, m);
        if complement.is_empty() {
            continue;
        }
        let etas: Vec<(TableauFormula, usize)> = complement
            .iter()
            .enumerate()
            .map(|(i, j)| (eta(&t, j, i + 1), i + 1))
            .collect();
        for (f, _) in &etas {
            formulas.insert(f.clone());
        }
        pending_splits.push(PendingSplit { formula: idx, etas });
    }
    Node { formulas, chain: ComponentChain::new(), pending_splits, min_decisions: Vec::new(), provenance: Provenance::root() }
}

/// Applies the split rule to the first pending ψ: one child per `S ⊆ I`.
/// Children are ordered by the complement `I − S` read as a binary number
/// with bit `b` standing for index `b + 1`, so `S = I` comes first.
pub fn split_children(n: &Node) -> Vec<Node> {
    let pending = n.pending_splits.first().expect("split_children needs a pending split");
    let m = pending.etas.len();
    let mut children = Vec::with_capacity(1 << m);
    for bits in 0..(1usize << m) {
        let in_s = |pos: usize| bits & (1 << pos) == 0;
        let mut formulas = IndexSet::new();
        let mut added = Vec::new();
        for f in &n.formulas {
            match pending.etas.iter().position(|(e, _)| e == f) {
                Some(pos) => {
                    let TableauFormula::Disjunct(below, above) = f else {
                        unreachable!("η-formulas are disjuncts")
                    };
                    let chosen = TableauFormula::Cmp(if in_s(pos) { below.clone() } else { above.clone() });
                    added.push(chosen.clone());
                    formulas.insert(chosen);
                }
                None => {
                    formulas.insert(f.clone());
                }
            }
        }
        let subset: Vec<usize> =
            pending.etas.iter().enumerate().filter(|(pos, _)| in_s(*pos)).map(|(_, (_, i))| *i).collect();
        children.push(Node {
            formulas,
            chain: n.chain.clone(),
            pending_splits: n.pending_splits[1..].to_vec(),
            min_decisions: n.min_decisions.clone(),
            provenance: Provenance { rule: RuleTag::Split, case: CaseTag::Subset(subset), active: None, added },
        });
    }
    children
}

/// The active term: in the first formula that contains an interpreted
/// term, the first one met reading the formula left to right.
pub fn select_active(n: &Node) -> Option<Term> {
    if !n.pending_splits.is_empty() {
        return None;
    }
    n.formulas
        .iter()
        .flat_map(TableauFormula::terms)
        .find_map(Term::first_interpreted_in_reading_order)
        .cloned()
}

/// The successors of `n`: split children while splits are pending, then
/// the expansion rule for the active term. Empty for a leaf.
pub fn successors(n: &Node) -> Vec<Node> {
    if !n.pending_splits.is_empty() {
        split_children(n)
    } else if n.is_leaf() {
        Vec::new()
    } else {
        expand(n)
    }
}
