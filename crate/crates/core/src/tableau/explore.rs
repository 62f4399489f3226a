//! Depth-first search for an open branch.

use std::time::{Duration, Instant};

use serde::Serialize;

use super::{build_root, dedup_formulas, successors, Node, Provenance, RuleTag};
use crate::formula::Formula;
use crate::kset::{complement_intervals, Interval, KSet};
use crate::model::{extract_model, verify_report, ExtractedModel};
use crate::solver::{check_constraints, refute, Backend, SolverConfig, SolverResult};
use crate::term::TranslationMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExploreConfig {
    pub solver: SolverConfig,
    /// Check `n↾L0` at inner nodes and cut subtrees already closed. With
    /// the grid backend only the interval refuter is used there.
    pub prune: bool,
    /// Nodes generated before the search gives up with `Unknown`.
    pub max_nodes: usize,
    pub deadline: Option<Duration>,
    pub record_trace: bool,
    /// Count violations of the termination measure and of L0
    /// monotonicity on every edge.
    pub check_invariants: bool,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        ExploreConfig {
            solver: SolverConfig::default(),
            prune: false,
            max_nodes: 200_000,
            deadline: None,
            record_trace: false,
            check_invariants: true,
        }
    }
}

impl ExploreConfig {
    pub fn with_solver(solver: SolverConfig) -> Self {
        ExploreConfig { solver, ..Self::default() }
    }

    pub fn pruned(mut self) -> Self {
        self.prune = true;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Satisfiable {
        model: ExtractedModel,
        leaf: Box<Node>,
        /// Rule applications from the root down to `leaf`.
        path: Vec<Provenance>,
    },
    Unsatisfiable,
    /// Some branch could not be decided; one reason per undecided leaf or
    /// exhausted budget.
    Unknown { reasons: Vec<String> },
}

impl Verdict {
    pub fn tag(&self) -> &'static str {
        match self {
            Verdict::Satisfiable { .. } => "sat",
            Verdict::Unsatisfiable => "unsat",
            Verdict::Unknown { .. } => "unknown",
        }
    }

    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::Satisfiable { .. })
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, Verdict::Unsatisfiable)
    }

    pub fn model(&self) -> Option<&ExtractedModel> {
        match self {
            Verdict::Satisfiable { model, .. } => Some(model),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub nodes: usize,
    pub leaves: usize,
    pub closed: usize,
    pub undecided: usize,
    pub pruned: usize,
    pub solver_calls: usize,
    pub edges: usize,
    pub max_depth: usize,
    pub elapsed_ms: u128,
    pub measure_violations: usize,
    pub monotonicity_violations: usize,
}

/// One edge of the search tree. Node ids are dotted child positions from
/// the root, which is `1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEdge {
    pub parent: String,
    pub child: String,
    pub rule: &'static str,
    pub case: String,
    pub active: Option<String>,
    pub added: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Exploration {
    pub verdict: Verdict,
    pub stats: Stats,
    pub trace: Vec<TraceEdge>,
    pub translation: TranslationMap,
}

const MAX_REASONS: usize = 16;
const INNER_REFUTE_BOXES: usize = 8;

enum Flow {
    Continue,
    Found(Verdict),
    Stop(String),
}

struct Explorer<'a> {
    psis: &'a [Formula],
    k: &'a KSet,
    complement: Vec<Interval>,
    map: TranslationMap,
    config: &'a ExploreConfig,
    stats: Stats,
    trace: Vec<TraceEdge>,
    reasons: Vec<String>,
    start: Instant,
}

impl Explorer<'_> {
    fn note_undecided(&mut self, id: &str, why: String) {
        self.stats.undecided += 1;
        if self.reasons.len() < MAX_REASONS {
            self.reasons.push(format!("leaf {id}: {why}"));
        }
    }

    fn solve_leaf(&mut self, node: &Node, id: &str, path: &[Provenance]) -> Flow {
        self.stats.leaves += 1;
        let e = match node.leaf_constraints(&self.complement) {
            Ok(e) => e,
            Err(err) => {
                self.note_undecided(id, err.to_string());
                return Flow::Continue;
            }
        };
        self.stats.solver_calls += 1;
        match check_constraints(&e, &self.config.solver) {
            SolverResult::Unsat => self.stats.closed += 1,
            SolverResult::Unknown(why) => self.note_undecided(id, why),
            SolverResult::Sat(sol) => match extract_model(&sol, &node.chain, &self.map) {
                Ok(model) => {
                    let report = verify_report(self.psis, self.k, &model);
                    if report.ok {
                        return Flow::Found(Verdict::Satisfiable {
                            model,
                            leaf: Box::new(node.clone()),
                            path: path.to_vec(),
                        });
                    }
                    let failed: Vec<String> = report.failures.iter().map(|(f, _)| f.to_string()).collect();
                    self.note_undecided(id, format!("extracted model fails {}", failed.join(", ")));
                }
                Err(err) => self.note_undecided(id, format!("model extraction: {err}")),
            },
        }
        Flow::Continue
    }

    /// Whether an inner node is already unsolvable: interval refutation of
    /// all its comparisons, then (SMT only, and only when the L0 part grew)
    /// a backend check of `n↾L0`.
    fn closed_early(&mut self, node: &Node, l0_grew: bool) -> bool {
        if refute(&node.relaxation(&self.complement), INNER_REFUTE_BOXES) {
            return true;
        }
        if !l0_grew {
            return false;
        }
        let Ok(e) = node.l0_constraints(&self.complement) else {
            return false;
        };
        match &self.config.solver.backend {
            Backend::Grid(_) => false,
            Backend::Smt(_) => {
                self.stats.solver_calls += 1;
                check_constraints(&e, &self.config.solver).is_unsat()
            }
        }
    }

    fn check_edge(&mut self, parent: &Node, child: &Node) {
        if child.provenance.rule != RuleTag::Split && child.measure() >= parent.measure() {
            self.stats.measure_violations += 1;
        }
        if !parent.l0_formulas().all(|c| child.contains_formula(&c.clone().into())) {
            self.stats.monotonicity_violations += 1;
        }
    }

    fn visit(&mut self, node: &Node, id: &str, depth: usize, l0_count: usize, path: &mut Vec<Provenance>) -> Flow {
        self.stats.max_depth = self.stats.max_depth.max(depth);
        if let Some(limit) = self.config.deadline {
            if self.start.elapsed() > limit {
                return Flow::Stop(format!("deadline of {limit:?} reached"));
            }
        }
        if node.is_leaf() {
            return self.solve_leaf(node, id, path);
        }
        let here = node.l0_formulas().count();
        if self.config.prune && self.closed_early(node, here > l0_count) {
            self.stats.pruned += 1;
            return Flow::Continue;
        }
        for (i, child) in successors(node).into_iter().enumerate() {
            self.stats.nodes += 1;
            self.stats.edges += 1;
            if self.stats.nodes > self.config.max_nodes {
                return Flow::Stop(format!("node budget of {} exhausted", self.config.max_nodes));
            }
            if self.config.check_invariants {
                self.check_edge(node, &child);
            }
            let child_id = format!("{id}.{}", i + 1);
            if self.config.record_trace {
                let p = &child.provenance;
                self.trace.push(TraceEdge {
                    parent: id.to_string(),
                    child: child_id.clone(),
                    rule: p.rule.tag(),
                    case: p.case.to_string(),
                    active: p.active.as_ref().map(ToString::to_string),
                    added: p.added.iter().map(ToString::to_string).collect(),
                });
            }
            path.push(child.provenance.clone());
            let flow = self.visit(&child, &child_id, depth + 1, here, path);
            path.pop();
            match flow {
                Flow::Continue => {}
                other => return other,
            }
        }
        Flow::Continue
    }
}

/// Decides K-satisfiability of `Ψ` by searching the K-tableau.
pub fn explore(psis: &[Formula], k: &KSet, config: &ExploreConfig) -> Exploration {
    explore_with(psis, k, config, TranslationMap::new())
}

/// As [`explore`], starting from a given atom-to-variable map.
pub fn explore_with(psis: &[Formula], k: &KSet, config: &ExploreConfig, map: TranslationMap) -> Exploration {
    let psis = dedup_formulas(psis);
    let mut explorer = Explorer {
        psis: &psis,
        k,
        complement: complement_intervals(k),
        map,
        config,
        stats: Stats::default(),
        trace: Vec::new(),
        reasons: Vec::new(),
        start: Instant::now(),
    };
    let root = build_root(&psis, k, &mut explorer.map);
    explorer.stats.nodes = 1;
    let flow = explorer.visit(&root, "1", 0, 0, &mut Vec::new());
    let verdict = match flow {
        Flow::Found(v) => v,
        Flow::Stop(why) => {
            let mut reasons = vec![why];
            reasons.append(&mut explorer.reasons);
            Verdict::Unknown { reasons }
        }
        Flow::Continue if explorer.stats.undecided > 0 => Verdict::Unknown { reasons: explorer.reasons.clone() },
        Flow::Continue => Verdict::Unsatisfiable,
    };
    explorer.stats.elapsed_ms = explorer.start.elapsed().as_millis();
    Exploration { verdict, stats: explorer.stats, trace: explorer.trace, translation: explorer.map }
}
