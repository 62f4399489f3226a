//! Sound infeasibility proofs by interval reasoning.
//!
//! Every symbol starts in `[0,1]`. Constraints are propagated forwards and
//! backwards through `+`, `-`, `min` and `max` until nothing changes, then
//! the box is bisected a bounded number of times. A box is discarded only
//! when some constraint is false for every point in it, so a refutation is
//! a proof. Failing to refute says nothing.

use std::collections::BTreeMap;

use num_traits::Zero;

use super::eval::{certainly_false, eval_exact, eval_span, span_add, span_sub, Span};
use super::ConstraintSet;
use crate::ratio::{int, one, zero, Rational};
use crate::term::{BinOp, CmpOp, Comparison, Symbol, Term};

const MAX_ROUNDS: usize = 40;

/// Whether the constraint set is provably unsatisfiable over `[0,1]`.
/// `max_boxes` bounds the bisection; `0` limits the check to ground atoms,
/// `s < s`, and cycles among difference constraints.
pub fn refute(e: &ConstraintSet, max_boxes: usize) -> bool {
    if refute_syntactic(e) || refute_difference_bounds(e) {
        return true;
    }
    if max_boxes == 0 {
        return false;
    }
    let symbols: Vec<Symbol> = e.symbols().into_iter().collect();
    let domains: BTreeMap<Symbol, (Rational, Rational)> =
        symbols.iter().map(|s| (s.clone(), (zero(), one()))).collect();
    let mut budget = max_boxes;
    refute_box(e, domains, &mut budget)
}

/// Ground comparisons that evaluate false, and `s < s`.
pub fn refute_syntactic(e: &ConstraintSet) -> bool {
    e.atoms().iter().any(|c| {
        if c.op == CmpOp::Lt && c.lhs == c.rhs {
            return true;
        }
        if c.lhs.is_ground() && c.rhs.is_ground() {
            let none = |_: &Symbol| None;
            return matches!(
                (eval_exact(&c.lhs, e.endpoints(), &none), eval_exact(&c.rhs, e.endpoints(), &none)),
                (Some(l), Some(r)) if !super::eval::compare(c.op, &l, &r)
            );
        }
        false
    })
}

/// A bound `to - from <= weight` (strict when `strict`).
#[derive(Clone, Debug, PartialEq, Eq)]
struct Bound {
    weight: Rational,
    strict: bool,
}

impl Bound {
    fn tighter_than(&self, other: &Bound) -> bool {
        self.weight < other.weight || (self.weight == other.weight && self.strict && !other.strict)
    }

    fn then(&self, other: &Bound) -> Bound {
        Bound {
            weight: &self.weight + &other.weight,
            strict: self.strict || other.strict,
        }
    }
}

// A side of a comparison that is a symbol or a ground constant.
enum Side {
    Sym(usize),
    Value(Rational),
}

/// Negative cycles among comparisons whose sides are single symbols or
/// ground constants, together with the `[0,1]` bounds of every symbol.
pub fn refute_difference_bounds(e: &ConstraintSet) -> bool {
    let symbols: Vec<Symbol> = e.symbols().into_iter().collect();
    // Node 0 stands for the constant zero.
    let n = symbols.len() + 1;
    let index = |s: &Symbol| symbols.binary_search(s).ok().map(|i| i + 1);
    let mut dist: Vec<Vec<Option<Bound>>> = vec![vec![None; n]; n];
    let relax = |from: usize, to: usize, b: Bound, dist: &mut Vec<Vec<Option<Bound>>>| {
        let slot = &mut dist[from][to];
        if slot.as_ref().is_none_or(|cur| b.tighter_than(cur)) {
            *slot = Some(b);
        }
    };
    for i in 1..n {
        relax(0, i, Bound { weight: one(), strict: false }, &mut dist);
        relax(i, 0, Bound { weight: zero(), strict: false }, &mut dist);
    }
    let none = |_: &Symbol| None;
    let side = |t: &Term| -> Option<Side> {
        if let Some(s) = t.as_symbol() {
            return index(&s).map(Side::Sym);
        }
        if t.is_ground() {
            return eval_exact(t, e.endpoints(), &none).map(Side::Value);
        }
        None
    };
    for c in e.atoms() {
        let (Some(l), Some(r)) = (side(&c.lhs), side(&c.rhs)) else {
            continue;
        };
        // l - r <= 0 becomes an edge r -> l of weight 0, constants move
        // into the weight against node 0.
        let (lnode, lval) = match l {
            Side::Sym(i) => (i, zero()),
            Side::Value(q) => (0, q),
        };
        let (rnode, rval) = match r {
            Side::Sym(i) => (i, zero()),
            Side::Value(q) => (0, q),
        };
        let w = &rval - &lval;
        let strict = c.op == CmpOp::Lt;
        relax(rnode, lnode, Bound { weight: w.clone(), strict }, &mut dist);
        if c.op == CmpOp::Eq {
            relax(lnode, rnode, Bound { weight: -w, strict: false }, &mut dist);
        }
    }
    for k in 0..n {
        for i in 0..n {
            let Some(ik) = dist[i][k].clone() else { continue };
            for j in 0..n {
                let Some(kj) = dist[k][j].as_ref() else { continue };
                let via = ik.then(kj);
                if dist[i][j].as_ref().is_none_or(|cur| via.tighter_than(cur)) {
                    dist[i][j] = Some(via);
                }
            }
        }
        if (0..n).any(|i| {
            dist[i][i]
                .as_ref()
                .is_some_and(|b| b.weight < zero() || (b.weight.is_zero() && b.strict))
        }) {
            return true;
        }
    }
    false
}

type Domains = BTreeMap<Symbol, (Rational, Rational)>;

fn refute_box(e: &ConstraintSet, mut dom: Domains, budget: &mut usize) -> bool {
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    if propagate(e, &mut dom).is_err() {
        return true;
    }
    // Widest domain gets split.
    let widest = dom
        .iter()
        .map(|(s, (lo, hi))| (hi - lo, s))
        .filter(|(w, _)| !w.is_zero())
        .max_by(|a, b| a.0.cmp(&b.0))
        .map(|(_, s)| s.clone());
    let Some(sym) = widest else {
        return false;
    };
    let (lo, hi) = dom[&sym].clone();
    let mid = (&lo + &hi) / int(2);
    let mut left = dom.clone();
    left.insert(sym.clone(), (lo, mid.clone()));
    if !refute_box(e, left, budget) {
        return false;
    }
    let mut right = dom;
    right.insert(sym, (mid, hi));
    refute_box(e, right, budget)
}

struct Empty;

fn span_of(dom: &Domains, s: &Symbol) -> Span {
    dom.get(s).map_or_else(Span::top, |(lo, hi)| Span::new(lo.clone(), hi.clone()))
}

fn propagate(e: &ConstraintSet, dom: &mut Domains) -> Result<(), Empty> {
    for _ in 0..MAX_ROUNDS {
        let mut changed = false;
        for c in e.atoms() {
            changed |= revise(c, e, dom)?;
        }
        if !changed {
            break;
        }
    }
    Ok(())
}

fn revise(c: &Comparison, e: &ConstraintSet, dom: &mut Domains) -> Result<bool, Empty> {
    let l = eval_span(&c.lhs, e.endpoints(), &|s| span_of(dom, s));
    let r = eval_span(&c.rhs, e.endpoints(), &|s| span_of(dom, s));
    if certainly_false(c.op, &l, &r) {
        return Err(Empty);
    }
    // Strict comparisons are narrowed through their closure.
    let (lt, rt) = match c.op {
        CmpOp::Le | CmpOp::Lt => (
            Span { lo: None, hi: r.hi.clone() },
            Span { lo: l.lo.clone(), hi: None },
        ),
        CmpOp::Eq => (r, l),
    };
    let mut changed = project(&c.lhs, &lt, e, dom)?;
    changed |= project(&c.rhs, &rt, e, dom)?;
    Ok(changed)
}

fn intersect_into(slot: &mut (Rational, Rational), target: &Span) -> Result<bool, Empty> {
    let mut changed = false;
    if let Some(lo) = &target.lo {
        if *lo > slot.0 {
            slot.0 = lo.clone();
            changed = true;
        }
    }
    if let Some(hi) = &target.hi {
        if *hi < slot.1 {
            slot.1 = hi.clone();
            changed = true;
        }
    }
    if slot.0 > slot.1 {
        return Err(Empty);
    }
    Ok(changed)
}

fn outside(q: &Rational, target: &Span) -> bool {
    target.lo.as_ref().is_some_and(|lo| q < lo) || target.hi.as_ref().is_some_and(|hi| q > hi)
}

/// Narrows the domains so that `t` can take values in `target`.
fn project(t: &Term, target: &Span, e: &ConstraintSet, dom: &mut Domains) -> Result<bool, Empty> {
    if target.lo.is_none() && target.hi.is_none() {
        return Ok(false);
    }
    match t {
        Term::Var(_) | Term::Param(_) => {
            let sym = t.as_symbol().expect("symbol term");
            match dom.get_mut(&sym) {
                Some(slot) => intersect_into(slot, target),
                None => Ok(false),
            }
        }
        Term::Const(_) | Term::Endpoint(..) => {
            let v = eval_span(t, e.endpoints(), &|_| Span::top());
            match (&v.lo, &v.hi) {
                (Some(q), Some(_)) if outside(q, target) => Err(Empty),
                _ => Ok(false),
            }
        }
        Term::Bin(op, l, r) => {
            let lv = eval_span(l, e.endpoints(), &|s| span_of(dom, s));
            let rv = eval_span(r, e.endpoints(), &|s| span_of(dom, s));
            match op {
                BinOp::Add => {
                    let mut ch = project(l, &span_sub(target, &rv), e, dom)?;
                    let lv = eval_span(l, e.endpoints(), &|s| span_of(dom, s));
                    ch |= project(r, &span_sub(target, &lv), e, dom)?;
                    Ok(ch)
                }
                BinOp::Sub => {
                    let mut ch = project(l, &span_add(target, &rv), e, dom)?;
                    let lv = eval_span(l, e.endpoints(), &|s| span_of(dom, s));
                    ch |= project(r, &span_sub(&lv, target), e, dom)?;
                    Ok(ch)
                }
                BinOp::Min => {
                    // Both operands are at least the lower end; one that is
                    // certainly above the upper end forces the other below it.
                    let floor = Span { lo: target.lo.clone(), hi: None };
                    let mut ch = project(l, &floor, e, dom)?;
                    ch |= project(r, &floor, e, dom)?;
                    if let Some(hi) = &target.hi {
                        let ceil = Span { lo: None, hi: Some(hi.clone()) };
                        if lv.lo.as_ref().is_some_and(|lo| lo > hi) {
                            ch |= project(r, &ceil, e, dom)?;
                        }
                        if rv.lo.as_ref().is_some_and(|lo| lo > hi) {
                            ch |= project(l, &ceil, e, dom)?;
                        }
                    }
                    Ok(ch)
                }
                BinOp::Max => {
                    let ceil = Span { lo: None, hi: target.hi.clone() };
                    let mut ch = project(l, &ceil, e, dom)?;
                    ch |= project(r, &ceil, e, dom)?;
                    if let Some(lo) = &target.lo {
                        let floor = Span { lo: Some(lo.clone()), hi: None };
                        if lv.hi.as_ref().is_some_and(|hi| hi < lo) {
                            ch |= project(r, &floor, e, dom)?;
                        }
                        if rv.hi.as_ref().is_some_and(|hi| hi < lo) {
                            ch |= project(l, &floor, e, dom)?;
                        }
                    }
                    Ok(ch)
                }
                // Products and quotients are only checked, not inverted.
                BinOp::Mul | BinOp::Div | BinOp::TNorm | BinOp::Resid => {
                    let v = eval_span(t, e.endpoints(), &|s| span_of(dom, s));
                    if certainly_disjoint(&v, target) {
                        Err(Empty)
                    } else {
                        Ok(false)
                    }
                }
            }
        }
        Term::Delta(_) => Ok(false),
    }
}

fn certainly_disjoint(v: &Span, target: &Span) -> bool {
    matches!((&v.lo, &target.hi), (Some(a), Some(b)) if a > b)
        || matches!((&v.hi, &target.lo), (Some(a), Some(b)) if a < b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::rat;
    use crate::term::Comparison;

    fn set(atoms: Vec<Comparison>) -> ConstraintSet {
        ConstraintSet::new(atoms, &[]).unwrap()
    }

    fn v(n: &str) -> Term {
        Term::var(n)
    }

    fn p(n: &str) -> Term {
        Term::param(n)
    }

    #[test]
    fn ground_falsity() {
        let e = set(vec![Comparison::le(Term::one(), Term::Const(rat(3, 4)))]);
        assert!(refute(&e, 0));
        let e = set(vec![Comparison::le(Term::Const(rat(1, 2)), Term::one())]);
        assert!(!refute(&e, 100));
    }

    #[test]
    fn strict_self_comparison() {
        let e = set(vec![Comparison::lt(v("x"), v("x"))]);
        assert!(refute(&e, 0));
    }

    #[test]
    fn strict_cycle_is_refuted_by_propagation() {
        let e = set(vec![Comparison::lt(p("a"), p("b")), Comparison::le(p("b"), p("a"))]);
        assert!(refute(&e, 0));
        let e = set(vec![
            Comparison::le(Term::zero(), p("a0")),
            Comparison::lt(p("a0"), p("b0")),
            Comparison::le(p("b0"), Term::Const(rat(1, 4))),
            Comparison::le(Term::Const(rat(1, 2)), p("a0")),
        ]);
        assert!(refute(&e, 0));
        let e = set(vec![Comparison::lt(p("a"), p("b")), Comparison::le(p("b"), Term::one())]);
        assert!(!refute(&e, 0));
    }

    #[test]
    fn pinned_parameter_feeds_through_sums() {
        // 1 <= b, b - 1 + max(a, x) < 0 is infeasible on [0,1].
        let e = set(vec![
            Comparison::le(Term::one(), p("b")),
            Comparison::lt(
                Term::add(Term::sub(p("b"), Term::one()), Term::max(p("a"), v("x"))),
                Term::zero(),
            ),
        ]);
        assert!(refute(&e, 50));
    }

    #[test]
    fn does_not_refute_satisfiable_sets() {
        let e = set(vec![
            Comparison::eq(Term::mul(v("x"), v("x")), Term::Const(rat(1, 2))),
            Comparison::lt(p("a"), p("b")),
        ]);
        assert!(!refute(&e, 200));
    }

    #[test]
    fn bisection_handles_nonlinear_gaps() {
        // x·x >= 1/2 and x <= 1/2 cannot both hold.
        let e = set(vec![
            Comparison::le(Term::Const(rat(1, 2)), Term::mul(v("x"), v("x"))),
            Comparison::le(v("x"), Term::Const(rat(1, 2))),
        ]);
        assert!(refute(&e, 50));
    }
}
