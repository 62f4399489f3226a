//! K-satisfiability for BL with Baaz delta and involutive negation.

pub mod formula;
pub mod kset;
pub mod model;
pub mod ratio;
pub mod solver;
pub mod tableau;
pub mod term;

pub use formula::{parse_formula, render_formula, Formula, ParseError};
pub use kset::{complement_intervals, contains, parse_kset, Interval, KSet, KSetError};
pub use model::{
    consistency_degree, evaluate, extract_model, strong_r_sat, verify_model, weak_r_sat, Component, ComponentKind,
    DegreeEstimate, DegreeMode, ExtractedModel, ModelError, ModelRecord, OrdinalSum,
};
pub use ratio::{format_rational, parse_rational, Rational};
pub use solver::{check_constraints, Backend, ConstraintSet, GridConfig, SmtConfig, Solution, SolverConfig, SolverResult};
pub use tableau::{explore, ExploreConfig, Exploration, Node, Stats, TraceEdge, Verdict};
pub use term::{Comparison, TableauFormula, Term, TranslationMap};
