//! Rules (⋆), (⇒) and (Δ).

use indexmap::IndexSet;

use super::cases::{component_cases, separation_cases_for, SeparationMode};
use super::{select_active, CaseTag, MinDecision, ChainEntry, ComponentChain, Label, Node, Provenance, RuleTag};
use crate::term::{chained, substitute, BinOp, CmpOp, Comparison, TableauFormula, Term};

fn child(
    n: &Node,
    active: &Term,
    replacement: &Term,
    added: Vec<Comparison>,
    chain: ComponentChain,
    rule: RuleTag,
    case: CaseTag,
) -> Node {
    let mut formulas: IndexSet<TableauFormula> =
        n.formulas.iter().map(|g| substitute(g, replacement, active)).collect();
    let added: Vec<TableauFormula> = added.into_iter().map(TableauFormula::Cmp).collect();
    formulas.extend(added.iter().cloned());
    let mut min_decisions: Vec<MinDecision> = n.min_decisions.iter().map(|d| d.replace(active, replacement)).collect();
    let mode = match rule {
        RuleTag::StarMin => Some(SeparationMode::TNorm),
        RuleTag::ImplMin => Some(SeparationMode::Residuum),
        _ => None,
    };
    if let (Some(mode), Term::Bin(_, x, y)) = (mode, active) {
        min_decisions.push(MinDecision { mode, x: (**x).clone(), y: (**y).clone() });
    }
    Node {
        formulas,
        chain,
        pending_splits: Vec::new(),
        min_decisions,
        provenance: Provenance { rule, case, active: Some(active.clone()), added },
    }
}

fn lukasiewicz_tnorm(e: &ChainEntry, x: &Term, y: &Term) -> Term {
    Term::max(e.a_term(), Term::sub(Term::add(x.clone(), y.clone()), e.b_term()))
}

fn product_tnorm(e: &ChainEntry, x: &Term, y: &Term) -> Term {
    let (a, b) = (e.a_term(), e.b_term());
    Term::add(
        a.clone(),
        Term::div(Term::mul(Term::sub(x.clone(), a.clone()), Term::sub(y.clone(), a.clone())), Term::sub(b, a)),
    )
}

fn lukasiewicz_resid(e: &ChainEntry, x: &Term, y: &Term) -> Term {
    Term::add(Term::sub(e.b_term(), x.clone()), y.clone())
}

fn product_resid(e: &ChainEntry, x: &Term, y: &Term) -> Term {
    let (a, b) = (e.a_term(), e.b_term());
    Term::add(
        a.clone(),
        Term::div(Term::mul(Term::sub(y.clone(), a.clone()), Term::sub(b, a.clone())), Term::sub(x.clone(), a)),
    )
}

/// Expands `n` on its selected active term.
pub fn expand(n: &Node) -> Vec<Node> {
    let active = select_active(n).expect("expand needs a node with an interpreted term");
    expand_with(n, &active)
}

/// Expands `n` on the given active term, which must occur in `n`.
pub fn expand_with(n: &Node, active: &Term) -> Vec<Node> {
    assert!(n.pending_splits.is_empty(), "expansion before all splits are done");
    let mut out = Vec::new();
    match active {
        Term::Bin(BinOp::TNorm, x, y) => {
            for (label, rule, repl) in [
                (Label::L, RuleTag::StarL, lukasiewicz_tnorm as fn(&ChainEntry, &Term, &Term) -> Term),
                (Label::P, RuleTag::StarP, product_tnorm),
            ] {
                for cc in component_cases(&n.chain, label) {
                    let (a, b) = (cc.entry.a_term(), cc.entry.b_term());
                    let mut added = cc.constraints.clone();
                    added.extend(chained(a.clone(), [(CmpOp::Le, (**x).clone()), (CmpOp::Le, b.clone())]));
                    added.extend(chained(a, [(CmpOp::Le, (**y).clone()), (CmpOp::Le, b)]));
                    let r = repl(&cc.entry, x, y);
                    out.push(child(n, active, &r, added, cc.chain, rule, CaseTag::Case(cc.case)));
                }
            }
            let r = Term::min((**x).clone(), (**y).clone());
            for sc in separation_cases_for(&n.chain, x, y, SeparationMode::TNorm) {
                out.push(child(n, active, &r, sc.constraints, n.chain.clone(), RuleTag::StarMin, CaseTag::Case(sc.case)));
            }
        }
        Term::Bin(BinOp::Resid, x, y) => {
            out.push(child(
                n,
                active,
                &Term::one(),
                vec![Comparison::le((**x).clone(), (**y).clone())],
                n.chain.clone(),
                RuleTag::ImplAll,
                CaseTag::None,
            ));
            for (label, rule, repl) in [
                (Label::L, RuleTag::ImplL, lukasiewicz_resid as fn(&ChainEntry, &Term, &Term) -> Term),
                (Label::P, RuleTag::ImplP, product_resid),
            ] {
                for cc in component_cases(&n.chain, label) {
                    let mut added = cc.constraints.clone();
                    added.extend(chained(
                        cc.entry.a_term(),
                        [(CmpOp::Le, (**y).clone()), (CmpOp::Lt, (**x).clone()), (CmpOp::Le, cc.entry.b_term())],
                    ));
                    let r = repl(&cc.entry, x, y);
                    out.push(child(n, active, &r, added, cc.chain, rule, CaseTag::Case(cc.case)));
                }
            }
            for sc in separation_cases_for(&n.chain, x, y, SeparationMode::Residuum) {
                let mut added = sc.constraints;
                added.push(Comparison::lt((**y).clone(), (**x).clone()));
                out.push(child(n, active, y, added, n.chain.clone(), RuleTag::ImplMin, CaseTag::Case(sc.case)));
            }
        }
        Term::Delta(x) => {
            out.push(child(
                n,
                active,
                &Term::one(),
                vec![Comparison::le(Term::one(), (**x).clone())],
                n.chain.clone(),
                RuleTag::Delta1,
                CaseTag::None,
            ));
            out.push(child(
                n,
                active,
                &Term::zero(),
                vec![Comparison::lt((**x).clone(), Term::one())],
                n.chain.clone(),
                RuleTag::Delta2,
                CaseTag::None,
            ));
        }
        other => panic!("`{other}` is not an interpreted term"),
    }
    out
}
