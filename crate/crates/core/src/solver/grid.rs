//! Exhaustive search over the grid `{0, 1/d, …, 1}`. Incomplete: it never
//! answers `Unsat`.

use std::collections::BTreeSet;

use super::eval::{eval_f64, holds_exact, holds_f64, Fuzzy};
use super::{ConstraintSet, Exactness, GridConfig, Solution, SolverResult};
use crate::ratio::{rat, to_f64, Rational};
use crate::term::{Comparison, Symbol, Term};

pub fn grid_search(e: &ConstraintSet, denominator: u32) -> SolverResult {
    grid_search_with(e, &GridConfig { denominator, ..GridConfig::default() })
}

/// Parameters first, then variables, each in order of first occurrence.
fn symbol_order(e: &ConstraintSet) -> Vec<Symbol> {
    let mut params = Vec::new();
    let mut vars = Vec::new();
    let mut seen = BTreeSet::new();
    fn walk(t: &Term, seen: &mut BTreeSet<Symbol>, params: &mut Vec<Symbol>, vars: &mut Vec<Symbol>) {
        match t {
            Term::Var(_) | Term::Param(_) => {
                let s = t.as_symbol().expect("symbol");
                if seen.insert(s.clone()) {
                    match s {
                        Symbol::Param(_) => params.push(s),
                        Symbol::Var(_) => vars.push(s),
                    }
                }
            }
            Term::Bin(_, l, r) => {
                walk(l, seen, params, vars);
                walk(r, seen, params, vars);
            }
            Term::Delta(t) => walk(t, seen, params, vars),
            Term::Const(_) | Term::Endpoint(..) => {}
        }
    }
    for c in e.atoms() {
        walk(&c.lhs, &mut seen, &mut params, &mut vars);
        walk(&c.rhs, &mut seen, &mut params, &mut vars);
    }
    params.extend(vars);
    params
}

struct Search<'a> {
    e: &'a ConstraintSet,
    order: Vec<Symbol>,
    // Atoms that become fully assigned at each depth.
    due: Vec<Vec<&'a Comparison>>,
    grid: Vec<(Rational, f64)>,
    ends_f64: Vec<(f64, f64)>,
    values: Vec<usize>,
    visited: u64,
    budget: u64,
}

impl Search<'_> {
    fn lookup_f64(&self, s: &Symbol) -> f64 {
        let i = self.order.iter().position(|o| o == s).expect("ordered symbol");
        self.grid[self.values[i]].1
    }

    fn holds(&self, c: &Comparison) -> bool {
        let f = |s: &Symbol| self.lookup_f64(s);
        let quick = match (eval_f64(&c.lhs, &self.ends_f64, &f), eval_f64(&c.rhs, &self.ends_f64, &f)) {
            (Some(l), Some(r)) => holds_f64(c.op, l, r),
            _ => Fuzzy::Unsure,
        };
        match quick {
            Fuzzy::True => true,
            Fuzzy::False => false,
            Fuzzy::Unsure => {
                let sol = self.solution();
                holds_exact(c, self.e.endpoints(), &|s| sol.get(s)) == Some(true)
            }
        }
    }

    fn solution(&self) -> Solution {
        let mut sol = Solution::exact();
        for (s, &v) in self.order.iter().zip(&self.values) {
            sol.set(s, self.grid[v].0.clone());
        }
        sol
    }

    /// `Some(true)` on a hit, `Some(false)` when the subtree is exhausted,
    /// `None` when the budget runs out.
    fn descend(&mut self, depth: usize) -> Option<bool> {
        if depth == self.order.len() {
            return Some(self.e.accepts(&self.solution()));
        }
        for v in 0..self.grid.len() {
            self.visited += 1;
            if self.visited > self.budget {
                return None;
            }
            self.values.push(v);
            let ok = self.due[depth].iter().all(|c| self.holds(c));
            if ok && self.descend(depth + 1)? {
                return Some(true);
            }
            self.values.pop();
        }
        Some(false)
    }
}

pub fn grid_search_with(e: &ConstraintSet, config: &GridConfig) -> SolverResult {
    let d = config.denominator.max(1);
    let order = symbol_order(e);
    let grid: Vec<(Rational, f64)> = (0..=d)
        .map(|k| {
            let q = rat(k as i64, d as i64);
            let f = to_f64(&q);
            (q, f)
        })
        .collect();
    let mut due: Vec<Vec<&Comparison>> = vec![Vec::new(); order.len()];
    for c in e.atoms() {
        let mut syms = BTreeSet::new();
        c.lhs.symbols_into(&mut syms);
        c.rhs.symbols_into(&mut syms);
        match syms.iter().map(|s| order.iter().position(|o| o == s).expect("ordered")).max() {
            Some(last) => due[last].push(c),
            None => {
                let none = |_: &Symbol| None;
                if holds_exact(c, e.endpoints(), &none) != Some(true) {
                    return SolverResult::Unknown(format!("no grid point satisfies `{c}`"));
                }
            }
        }
    }
    let mut search = Search {
        e,
        order,
        due,
        grid,
        ends_f64: e.endpoints().0.iter().map(|(lo, hi)| (to_f64(lo), to_f64(hi))).collect(),
        values: Vec::new(),
        visited: 0,
        budget: config.max_assignments,
    };
    match search.descend(0) {
        Some(true) => {
            let sol = search.solution();
            debug_assert_eq!(sol.exactness, Exactness::Exact);
            SolverResult::Sat(sol)
        }
        Some(false) => SolverResult::Unknown(format!("no solution on the grid with denominator {d}")),
        None => SolverResult::Unknown(format!(
            "grid search gave up after {} assignments",
            config.max_assignments
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Comparison;

    fn set(atoms: Vec<Comparison>) -> ConstraintSet {
        ConstraintSet::new(atoms, &[]).unwrap()
    }

    #[test]
    fn finds_half_grid_witness() {
        let x = Term::var("x");
        let e = set(vec![
            Comparison::le(Term::constant(rat(1, 2)), x.clone()),
            Comparison::lt(x.clone(), Term::one()),
        ]);
        match grid_search(&e, 2) {
            SolverResult::Sat(sol) => assert_eq!(sol.sigma["x"], rat(1, 2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn irrational_witness_is_unknown() {
        let x = Term::var("x");
        let e = set(vec![Comparison::eq(Term::mul(x.clone(), x), Term::constant(rat(1, 2)))]);
        assert!(matches!(grid_search(&e, 4), SolverResult::Unknown(_)));
    }

    #[test]
    fn never_reports_unsat() {
        let e = set(vec![Comparison::le(Term::one(), Term::constant(rat(3, 4)))]);
        assert!(matches!(grid_search(&e, 7), SolverResult::Unknown(_)));
    }

    #[test]
    fn budget_exhaustion_is_unknown() {
        let sum = (1..6).fold(Term::var("x0"), |acc, i| Term::add(acc, Term::var(format!("x{i}"))));
        let e = set(vec![Comparison::lt(sum, Term::zero())]);
        let cfg = GridConfig { denominator: 4, max_assignments: 10 };
        match grid_search_with(&e, &cfg) {
            SolverResult::Unknown(msg) => assert!(msg.contains("gave up")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn division_by_zero_is_zero() {
        let x = Term::var("x");
        let e = set(vec![
            Comparison::eq(x.clone(), Term::zero()),
            Comparison::eq(Term::div(Term::one(), x), Term::zero()),
        ]);
        assert!(grid_search(&e, 1).is_sat());
    }
}
