//! Placement of a new component relative to the chain (Cases 1–4, 10) and
//! the positions of `x`, `y` outside any common component (Cases 5–9, 11).

use super::{ChainEntry, ComponentChain, Label};
use crate::term::{chained, CmpOp, Comparison, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentCase {
    pub case: u8,
    /// The component `[a, b]` that `x` and `y` share.
    pub entry: ChainEntry,
    /// `I^K`.
    pub constraints: Vec<Comparison>,
    pub chain: ComponentChain,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparationCase {
    pub case: u8,
    /// `J`.
    pub constraints: Vec<Comparison>,
}

/// Which rule the separation cases serve. For the residuum, `y` sitting
/// exactly on the lower end of `x`'s component is left to the Ł and P
/// subrules, so Case 6 is strict there.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SeparationMode {
    TNorm,
    Residuum,
}

pub fn component_cases(chain: &ComponentChain, label: Label) -> Vec<ComponentCase> {
    let fresh = chain.fresh(label);
    let (a, b) = (fresh.a_term(), fresh.b_term());
    let entries = chain.entries();
    let mut out = Vec::new();
    let Some(first) = entries.first() else {
        out.push(ComponentCase {
            case: 10,
            constraints: chained(Term::zero(), [(CmpOp::Le, a.clone()), (CmpOp::Lt, b.clone()), (CmpOp::Le, Term::one())]),
            chain: chain.with_entry_at(0, fresh.clone()),
            entry: fresh,
        });
        return out;
    };
    out.push(ComponentCase {
        case: 1,
        constraints: chained(Term::zero(), [(CmpOp::Le, a.clone()), (CmpOp::Lt, b.clone()), (CmpOp::Le, first.a_term())]),
        chain: chain.with_entry_at(0, fresh.clone()),
        entry: fresh.clone(),
    });
    for (i, e) in entries.iter().enumerate().filter(|(_, e)| e.label == label) {
        out.push(ComponentCase {
            case: 2,
            constraints: chained(e.a_term(), [(CmpOp::Eq, a.clone()), (CmpOp::Lt, b.clone()), (CmpOp::Eq, e.b_term())]),
            chain: chain.with_alias(fresh.clone(), i),
            entry: fresh.clone(),
        });
    }
    for (i, pair) in entries.windows(2).enumerate() {
        out.push(ComponentCase {
            case: 3,
            constraints: chained(pair[0].b_term(), [(CmpOp::Le, a.clone()), (CmpOp::Lt, b.clone()), (CmpOp::Le, pair[1].a_term())]),
            chain: chain.with_entry_at(i + 1, fresh.clone()),
            entry: fresh.clone(),
        });
    }
    let last = entries.last().expect("nonempty chain");
    out.push(ComponentCase {
        case: 4,
        constraints: chained(last.b_term(), [(CmpOp::Le, a.clone()), (CmpOp::Lt, b), (CmpOp::Le, Term::one())]),
        chain: chain.with_entry_at(entries.len(), fresh.clone()),
        entry: fresh,
    });
    out
}

/// Cases 5–9 and 11 exactly as stated, for the t-norm rule.
pub fn separation_cases(chain: &ComponentChain, x: &Term, y: &Term) -> Vec<SeparationCase> {
    separation_cases_for(chain, x, y, SeparationMode::TNorm)
}

pub fn separation_cases_for(chain: &ComponentChain, x: &Term, y: &Term, mode: SeparationMode) -> Vec<SeparationCase> {
    let entries = chain.entries();
    let Some(first) = entries.first() else {
        return vec![SeparationCase { case: 11, constraints: Vec::new() }];
    };
    let inside = |e: &ChainEntry| chained(e.a_term(), [(CmpOp::Le, x.clone()), (CmpOp::Le, e.b_term())]);
    let mut out = vec![SeparationCase {
        case: 5,
        constraints: chained(Term::zero(), [(CmpOp::Le, x.clone()), (CmpOp::Le, first.a_term())]),
    }];
    let below = match mode {
        SeparationMode::TNorm => CmpOp::Le,
        SeparationMode::Residuum => CmpOp::Lt,
    };
    for e in entries {
        let mut constraints = inside(e);
        constraints.push(Comparison::new(y.clone(), below, e.a_term()));
        out.push(SeparationCase { case: 6, constraints });
    }
    for e in entries {
        let mut constraints = inside(e);
        constraints.push(Comparison::le(e.b_term(), y.clone()));
        out.push(SeparationCase { case: 7, constraints });
    }
    for pair in entries.windows(2) {
        out.push(SeparationCase {
            case: 8,
            constraints: chained(pair[0].b_term(), [(CmpOp::Le, x.clone()), (CmpOp::Le, pair[1].a_term())]),
        });
    }
    let last = entries.last().expect("nonempty chain");
    out.push(SeparationCase {
        case: 9,
        constraints: chained(last.b_term(), [(CmpOp::Le, x.clone()), (CmpOp::Le, Term::one())]),
    });
    out
}
