//! Constraint terms over the reals, tableau formulas, and the translation of
//! BL formulas into terms.
//!
//! Terms without `*` (t-norm), `=>` (residuum) or `D` (delta) are plain
//! arithmetic and can be handed to a constraint solver. The interpreted
//! symbols are eliminated by the tableau rules one whole subterm at a time.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use indexmap::IndexSet;

use crate::formula::Formula;
use crate::kset::Interval;
use crate::ratio::{format_rational, one, zero, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EndpointSide {
    /// Left endpoint of a complement interval.
    Minus,
    /// Right endpoint of a complement interval.
    Plus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    /// Total division: `u ÷ 0 = 0`.
    Div,
    Min,
    Max,
    TNorm,
    Resid,
}

impl BinOp {
    pub fn is_interpreted(self) -> bool {
        matches!(self, BinOp::TNorm | BinOp::Resid)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Param(String),
    Const(Rational),
    /// `c_i-` / `c_i+`: the endpoints of the `i`-th complement interval
    /// (1-based).
    Endpoint(EndpointSide, usize),
    Bin(BinOp, Box<Term>, Box<Term>),
    Delta(Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn param(name: impl Into<String>) -> Term {
        Term::Param(name.into())
    }

    pub fn constant(q: Rational) -> Term {
        Term::Const(q)
    }

    pub fn zero() -> Term {
        Term::Const(zero())
    }

    pub fn one() -> Term {
        Term::Const(one())
    }

    pub fn bin(op: BinOp, l: Term, r: Term) -> Term {
        Term::Bin(op, Box::new(l), Box::new(r))
    }

    pub fn add(l: Term, r: Term) -> Term {
        Term::bin(BinOp::Add, l, r)
    }

    pub fn sub(l: Term, r: Term) -> Term {
        Term::bin(BinOp::Sub, l, r)
    }

    pub fn mul(l: Term, r: Term) -> Term {
        Term::bin(BinOp::Mul, l, r)
    }

    pub fn div(l: Term, r: Term) -> Term {
        Term::bin(BinOp::Div, l, r)
    }

    pub fn min(l: Term, r: Term) -> Term {
        Term::bin(BinOp::Min, l, r)
    }

    pub fn max(l: Term, r: Term) -> Term {
        Term::bin(BinOp::Max, l, r)
    }

    pub fn tnorm(l: Term, r: Term) -> Term {
        Term::bin(BinOp::TNorm, l, r)
    }

    pub fn resid(l: Term, r: Term) -> Term {
        Term::bin(BinOp::Resid, l, r)
    }

    pub fn delta(t: Term) -> Term {
        Term::Delta(Box::new(t))
    }

    /// Rooted at `*`, `=>` or `D`.
    pub fn is_interpreted(&self) -> bool {
        match self {
            Term::Bin(op, ..) => op.is_interpreted(),
            Term::Delta(_) => true,
            _ => false,
        }
    }

    pub fn is_l0(&self) -> bool {
        match self {
            Term::Var(_) | Term::Param(_) | Term::Const(_) | Term::Endpoint(..) => true,
            Term::Bin(op, l, r) => !op.is_interpreted() && l.is_l0() && r.is_l0(),
            Term::Delta(_) => false,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) | Term::Param(_) => false,
            Term::Const(_) | Term::Endpoint(..) => true,
            Term::Bin(_, l, r) => l.is_ground() && r.is_ground(),
            Term::Delta(t) => t.is_ground(),
        }
    }

    pub fn contains(&self, target: &Term) -> bool {
        if self == target {
            return true;
        }
        match self {
            Term::Bin(_, l, r) => l.contains(target) || r.contains(target),
            Term::Delta(t) => t.contains(target),
            _ => false,
        }
    }

    /// Replaces every occurrence of the whole subterm `target`.
    pub fn replace(&self, target: &Term, replacement: &Term) -> Term {
        if self == target {
            return replacement.clone();
        }
        match self {
            Term::Bin(op, l, r) => Term::bin(*op, l.replace(target, replacement), r.replace(target, replacement)),
            Term::Delta(t) => Term::delta(t.replace(target, replacement)),
            other => other.clone(),
        }
    }

    /// Interpreted subterms in pre-order (outermost first).
    pub fn interpreted_subterms_into(&self, out: &mut IndexSet<Term>) {
        if self.is_interpreted() {
            out.insert(self.clone());
        }
        match self {
            Term::Bin(_, l, r) => {
                l.interpreted_subterms_into(out);
                r.interpreted_subterms_into(out);
            }
            Term::Delta(t) => t.interpreted_subterms_into(out),
            _ => {}
        }
    }

    /// The first interpreted subterm in reading order of the rendered text:
    /// for an infix node the left operand is scanned before the operator
    /// itself, a prefix `D` is met before its operand.
    pub fn first_interpreted_in_reading_order(&self) -> Option<&Term> {
        match self {
            Term::Bin(op, l, r) => {
                if let Some(t) = l.first_interpreted_in_reading_order() {
                    return Some(t);
                }
                if op.is_interpreted() {
                    return Some(self);
                }
                r.first_interpreted_in_reading_order()
            }
            Term::Delta(_) => Some(self),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<Symbol> {
        match self {
            Term::Var(v) => Some(Symbol::Var(v.clone())),
            Term::Param(p) => Some(Symbol::Param(p.clone())),
            _ => None,
        }
    }

    pub fn symbols_into(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Term::Var(v) => {
                out.insert(Symbol::Var(v.clone()));
            }
            Term::Param(p) => {
                out.insert(Symbol::Param(p.clone()));
            }
            Term::Const(_) | Term::Endpoint(..) => {}
            Term::Bin(_, l, r) => {
                l.symbols_into(out);
                r.symbols_into(out);
            }
            Term::Delta(t) => t.symbols_into(out),
        }
    }
}

/// A variable or parameter name; solver assignments are keyed by these.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Param(String),
    Var(String),
}

impl Symbol {
    pub fn name(&self) -> &str {
        match self {
            Symbol::Param(s) | Symbol::Var(s) => s,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn term_level(t: &Term) -> u8 {
    match t {
        Term::Bin(BinOp::Resid, ..) => 1,
        Term::Bin(BinOp::TNorm, ..) => 2,
        Term::Bin(BinOp::Add | BinOp::Sub, ..) => 3,
        Term::Bin(BinOp::Mul | BinOp::Div, ..) => 4,
        Term::Const(q) if !q.is_integer() => 4,
        _ => 5,
    }
}

fn write_term_operand(f: &mut fmt::Formatter<'_>, t: &Term, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({t})")
    } else {
        write!(f, "{t}")
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Param(p) => f.write_str(p),
            Term::Const(q) => f.write_str(&format_rational(q)),
            Term::Endpoint(EndpointSide::Minus, i) => write!(f, "c{i}-"),
            Term::Endpoint(EndpointSide::Plus, i) => write!(f, "c{i}+"),
            Term::Delta(t) => {
                f.write_str("D ")?;
                write_term_operand(f, t, term_level(t) < 5)
            }
            Term::Bin(op @ (BinOp::Min | BinOp::Max), l, r) => {
                let name = if *op == BinOp::Min { "min" } else { "max" };
                write!(f, "{name}({l}, {r})")
            }
            Term::Bin(op, l, r) => {
                let lvl = term_level(self);
                let sym = match op {
                    BinOp::Add => " + ",
                    BinOp::Sub => " - ",
                    BinOp::Mul => " · ",
                    BinOp::Div => " ÷ ",
                    BinOp::TNorm => " * ",
                    BinOp::Resid => " => ",
                    BinOp::Min | BinOp::Max => unreachable!(),
                };
                // + and - associate left; everything else is parenthesised
                // unless it binds strictly tighter.
                let left_parens = if matches!(op, BinOp::Add | BinOp::Sub) {
                    term_level(l) < lvl
                } else {
                    term_level(l) <= lvl
                };
                write_term_operand(f, l, left_parens)?;
                f.write_str(sym)?;
                write_term_operand(f, r, term_level(r) <= lvl)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Le,
    Lt,
    Eq,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Eq => "=",
        }
    }
}

/// An atomic comparison `lhs op rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Comparison {
    pub op: CmpOp,
    pub lhs: Term,
    pub rhs: Term,
}

impl Comparison {
    pub fn new(lhs: Term, op: CmpOp, rhs: Term) -> Self {
        Comparison { op, lhs, rhs }
    }

    pub fn le(lhs: Term, rhs: Term) -> Self {
        Self::new(lhs, CmpOp::Le, rhs)
    }

    pub fn lt(lhs: Term, rhs: Term) -> Self {
        Self::new(lhs, CmpOp::Lt, rhs)
    }

    pub fn eq(lhs: Term, rhs: Term) -> Self {
        Self::new(lhs, CmpOp::Eq, rhs)
    }

    pub fn is_l0(&self) -> bool {
        self.lhs.is_l0() && self.rhs.is_l0()
    }

    pub fn replace(&self, target: &Term, replacement: &Term) -> Comparison {
        Comparison {
            op: self.op,
            lhs: self.lhs.replace(target, replacement),
            rhs: self.rhs.replace(target, replacement),
        }
    }

    pub fn contains(&self, target: &Term) -> bool {
        self.lhs.contains(target) || self.rhs.contains(target)
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.symbol(), self.rhs)
    }
}

/// Expands `t0 op0 t1 op1 t2 ...` into its adjacent comparisons.
pub fn chained(first: Term, rest: impl IntoIterator<Item = (CmpOp, Term)>) -> Vec<Comparison> {
    let mut out = Vec::new();
    let mut prev = first;
    for (op, next) in rest {
        out.push(Comparison::new(prev, op, next.clone()));
        prev = next;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TableauFormula {
    Cmp(Comparison),
    /// Two-way disjunction produced by [`eta`]; removed by the split rule.
    Disjunct(Comparison, Comparison),
}

impl TableauFormula {
    /// A plain comparison between arithmetic terms. Disjuncts never count,
    /// since the solver only ever sees comparisons.
    pub fn is_l0(&self) -> bool {
        matches!(self, TableauFormula::Cmp(c) if c.is_l0())
    }

    pub fn as_cmp(&self) -> Option<&Comparison> {
        match self {
            TableauFormula::Cmp(c) => Some(c),
            TableauFormula::Disjunct(..) => None,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        let (a, b) = match self {
            TableauFormula::Cmp(c) => (c, None),
            TableauFormula::Disjunct(l, r) => (l, Some(r)),
        };
        [&a.lhs, &a.rhs]
            .into_iter()
            .chain(b.into_iter().flat_map(|c| [&c.lhs, &c.rhs]))
    }

    pub fn contains(&self, target: &Term) -> bool {
        self.terms().any(|t| t.contains(target))
    }
}

impl From<Comparison> for TableauFormula {
    fn from(c: Comparison) -> Self {
        TableauFormula::Cmp(c)
    }
}

impl fmt::Display for TableauFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableauFormula::Cmp(c) => write!(f, "{c}"),
            TableauFormula::Disjunct(l, r) => write!(f, "{l} \\/ {r}"),
        }
    }
}

/// One-to-one assignment of solver variables to atoms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TranslationMap {
    atom_to_var: BTreeMap<String, String>,
    var_to_atom: BTreeMap<String, String>,
}

impl TranslationMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn for_formulas<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> Self {
        let mut map = Self::new();
        for f in formulas {
            for atom in f.atoms() {
                map.var_for(&atom);
            }
        }
        map
    }

    /// The variable for `atom`, allocating `mu_<atom>` on first use.
    pub fn var_for(&mut self, atom: &str) -> String {
        if let Some(v) = self.atom_to_var.get(atom) {
            return v.clone();
        }
        let var = format!("mu_{atom}");
        self.atom_to_var.insert(atom.to_string(), var.clone());
        self.var_to_atom.insert(var.clone(), atom.to_string());
        var
    }

    pub fn get(&self, atom: &str) -> Option<&str> {
        self.atom_to_var.get(atom).map(String::as_str)
    }

    pub fn atom_of(&self, var: &str) -> Option<&str> {
        self.var_to_atom.get(var).map(String::as_str)
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&str, &str)> {
        self.atom_to_var.iter().map(|(a, v)| (a.as_str(), v.as_str()))
    }
}

/// Translates a formula into an L1 term, extending `m` with any new atoms.
pub fn translate(f: &Formula, m: &mut TranslationMap) -> Term {
    match f {
        Formula::Falsum => Term::zero(),
        Formula::Verum => Term::one(),
        Formula::Atom(p) => Term::Var(m.var_for(p)),
        Formula::Strong(l, r) => Term::tnorm(translate(l, m), translate(r, m)),
        Formula::Impl(l, r) => Term::resid(translate(l, m), translate(r, m)),
        Formula::Or(l, r) => Term::max(translate(l, m), translate(r, m)),
        Formula::And(l, r) => Term::min(translate(l, m), translate(r, m)),
        Formula::Delta(g) => Term::delta(translate(g, m)),
        Formula::Inv(g) => Term::sub(Term::one(), translate(g, m)),
    }
}

/// Comparison operators of `x ◊- c_i-` and `c_i+ ◊+ x`: a closed end of
/// `J` makes the matching side strict.
pub fn eta_ops(j: &Interval) -> (CmpOp, CmpOp) {
    let below = if j.lo_closed() { CmpOp::Lt } else { CmpOp::Le };
    let above = if j.hi_closed() { CmpOp::Lt } else { CmpOp::Le };
    (below, above)
}

/// The disjunction `(x ◊- c_i-) \/ (c_i+ ◊+ x)`, which holds iff `x ∉ J_i`.
pub fn eta(x: &Term, j: &Interval, i: usize) -> TableauFormula {
    let (below, above) = eta_ops(j);
    TableauFormula::Disjunct(
        Comparison::new(x.clone(), below, Term::Endpoint(EndpointSide::Minus, i)),
        Comparison::new(Term::Endpoint(EndpointSide::Plus, i), above, x.clone()),
    )
}

/// `g` with every occurrence of `target` replaced by `replacement`.
pub fn substitute(g: &TableauFormula, replacement: &Term, target: &Term) -> TableauFormula {
    match g {
        TableauFormula::Cmp(c) => TableauFormula::Cmp(c.replace(target, replacement)),
        TableauFormula::Disjunct(l, r) => {
            TableauFormula::Disjunct(l.replace(target, replacement), r.replace(target, replacement))
        }
    }
}

/// Distinct subterms rooted at `*`, `=>` or `D`, in first-occurrence order.
pub fn interpreted_subterms<'a>(fs: impl IntoIterator<Item = &'a TableauFormula>) -> IndexSet<Term> {
    let mut out = IndexSet::new();
    for f in fs {
        for t in f.terms() {
            t.interpreted_subterms_into(&mut out);
        }
    }
    out
}
