//! Random instances shared by the integration suites.

#![allow(dead_code)]

use blsat_core::{parse_kset, Formula, KSet};
use rand::Rng;

pub const ATOMS: [&str; 3] = ["p", "q", "r"];

/// The designated sets random instances draw from.
pub fn kset_pool() -> Vec<KSet> {
    ["[1/2,3/4] u {1}", "{1}", "[1/2,1]", "(0,1]", "[0,1/2)", "{0} u [3/4,1]"]
        .iter()
        .map(|s| parse_kset(s).expect("pool entry parses"))
        .collect()
}

/// A formula over at most three atoms with at most `budget` connectives.
pub fn random_formula(rng: &mut impl Rng, budget: usize) -> Formula {
    if budget == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..8) {
            0 => Formula::Falsum,
            1 => Formula::Verum,
            i => Formula::atom(ATOMS[i % 3]),
        };
    }
    let rest = budget - 1;
    match rng.gen_range(0..6) {
        0 => Formula::delta(random_formula(rng, rest)),
        1 => Formula::inv(random_formula(rng, rest)),
        op => {
            let left = rng.gen_range(0..=rest);
            let l = random_formula(rng, left);
            let r = random_formula(rng, rest - left);
            match op {
                2 => Formula::strong(l, r),
                3 => Formula::implies(l, r),
                4 => Formula::or(l, r),
                _ => Formula::and(l, r),
            }
        }
    }
}

/// One or two formulas sharing a total budget of six connectives.
pub fn random_instance(rng: &mut impl Rng, pool: &[KSet]) -> (Vec<Formula>, KSet) {
    let k = pool[rng.gen_range(0..pool.len())].clone();
    let total = rng.gen_range(1..=6);
    let psis = if rng.gen_bool(0.6) {
        vec![random_formula(rng, total)]
    } else {
        let first = rng.gen_range(0..=total);
        vec![random_formula(rng, first), random_formula(rng, total - first)]
    };
    (psis, k)
}
