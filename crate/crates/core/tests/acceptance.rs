//! End-to-end acceptance criteria. Each criterion prints one PASS/FAIL/SKIP
//! line; the test fails if any criterion fails.

mod common;

use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use blsat_core::kset::{complement_intervals, contains, Interval};
use blsat_core::model::{evaluate, grid_oracle, residuum_apply, tnorm_apply, default_pool, OracleResult};
use blsat_core::ratio::rat;
use blsat_core::solver::eval::{holds_exact, Endpoints};
use blsat_core::tableau::{
    build_root, component_cases, expand, select_active, split_children, successors, CaseTag, ComponentChain, Label, Node,
    RuleTag,
};
use blsat_core::term::{eta, substitute, EndpointSide, Symbol};
use blsat_core::{
    check_constraints, consistency_degree, explore, extract_model, parse_formula, parse_kset, verify_model,
    Comparison, DegreeMode, ExploreConfig, ExtractedModel, Formula, KSet, OrdinalSum, Rational, SmtConfig,
    SolverConfig, SolverResult, TableauFormula, Term, TranslationMap,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn smt_available() -> bool {
    SmtConfig::default().available()
}

fn f(s: &str) -> Formula {
    parse_formula(s).unwrap()
}

fn example() -> (Vec<Formula>, KSet) {
    (vec![f("1 -> p & r"), f("D r -> p \\/ q")], parse_kset("[1/2,3/4] u {1}").unwrap())
}

fn pruned(solver: SolverConfig) -> ExploreConfig {
    ExploreConfig::with_solver(solver).pruned()
}

fn q(n: i64, d: i64) -> Term {
    Term::constant(rat(n, d))
}

fn v(a: &str) -> Term {
    Term::var(format!("mu_{a}"))
}

fn le(a: Term, b: Term) -> TableauFormula {
    Comparison::le(a, b).into()
}

fn lt(a: Term, b: Term) -> TableauFormula {
    Comparison::lt(a, b).into()
}

fn eq(a: Term, b: Term) -> TableauFormula {
    Comparison::eq(a, b).into()
}

fn pick(children: Vec<Node>, rule: RuleTag, case: CaseTag) -> Node {
    children.into_iter().find(|c| c.provenance.rule == rule && c.provenance.case == case).expect("child exists")
}

struct Replay {
    root: Node,
    splits: Vec<Node>,
    path: Vec<Node>,
    map: TranslationMap,
}

/// Follows the worked example from node (1) down to (1242111).
fn replay() -> Replay {
    let (psis, k) = example();
    let mut map = TranslationMap::new();
    let root = build_root(&psis, &k, &mut map);
    let splits = split_children(&root);
    let n124 = split_children(&splits[1])[3].clone();
    let n1241 = pick(expand(&n124), RuleTag::ImplAll, CaseTag::None);
    let n1242 = pick(expand(&n124), RuleTag::ImplL, CaseTag::Case(10));
    let n12421 = pick(expand(&n1242), RuleTag::StarL, CaseTag::Case(2));
    let n124211 = pick(expand(&n12421), RuleTag::Delta1, CaseTag::None);
    let n1242111 = pick(expand(&n124211), RuleTag::ImplAll, CaseTag::None);
    Replay { root, splits, path: vec![n124, n1241, n1242, n12421, n124211, n1242111], map }
}

fn printed(n: &Node, complement: &[Interval]) -> HashSet<TableauFormula> {
    n.formulas
        .iter()
        .map(|g| {
            let mut out = g.clone();
            for (i, j) in complement.iter().enumerate() {
                out = substitute(&out, &Term::constant(j.lo().clone()), &Term::Endpoint(EndpointSide::Minus, i + 1));
                out = substitute(&out, &Term::constant(j.hi().clone()), &Term::Endpoint(EndpointSide::Plus, i + 1));
            }
            out
        })
        .collect()
}

fn witness() -> ExtractedModel {
    let valuation: BTreeMap<String, Rational> =
        [("p", rat(1, 2)), ("q", rat(1, 1)), ("r", rat(1, 1))].iter().map(|(a, x)| (a.to_string(), x.clone())).collect();
    ExtractedModel::new(OrdinalSum::lukasiewicz(rat(0, 1), rat(1, 1)), valuation)
}

fn witness_values_exact(psis: &[Formula], m: &ExtractedModel) -> bool {
    evaluate(&psis[0], m) == Ok(rat(1, 2)) && evaluate(&psis[1], m) == Ok(rat(1, 1))
}

fn criterion_1() -> Outcome {
    let (psis, k) = example();
    let start = Instant::now();
    let out = explore(&psis, &k, &pruned(SolverConfig::grid()));
    let elapsed = start.elapsed();
    let Some(model) = out.verdict.model() else {
        return Outcome::Fail(format!("verdict {}", out.verdict.tag()));
    };
    let mut ok = verify_model(&psis, &k, model) && elapsed < Duration::from_secs(10);
    if *model == witness() {
        ok &= witness_values_exact(&psis, model);
    }
    // The printed open branch, solved directly, lands on the witness.
    let r = replay();
    let complement = complement_intervals(&k);
    let leaf = r.path.last().unwrap();
    let SolverResult::Sat(sol) = check_constraints(&leaf.leaf_constraints(&complement).unwrap(), &SolverConfig::grid()) else {
        return Outcome::Fail("node (1242111) not solvable".into());
    };
    let from_leaf = extract_model(&sol, &leaf.chain, &r.map).unwrap();
    ok &= from_leaf == witness() && witness_values_exact(&psis, &from_leaf) && verify_model(&psis, &k, &from_leaf);
    check(
        ok,
        format!(
            "sat in {} ms, model {:?}; (1242111) yields p=1/2, q=1, r=1 with values 1/2 and 1",
            elapsed.as_millis(),
            model.record().valuation
        ),
    )
}

fn criterion_2() -> Outcome {
    let (_, k) = example();
    let c = complement_intervals(&k);
    let r = replay();
    let t1 = Term::resid(Term::one(), Term::tnorm(v("p"), v("r")));
    let t2 = Term::resid(Term::delta(v("r")), Term::max(v("p"), v("q")));
    let etas = |t: &Term| {
        let (a, b) = (Comparison::lt(t.clone(), q(0, 1)), Comparison::le(q(1, 2), t.clone()));
        let (x, y) = (Comparison::le(t.clone(), q(3, 4)), Comparison::le(q(1, 1), t.clone()));
        vec![TableauFormula::Disjunct(a, b), TableauFormula::Disjunct(x, y)]
    };
    let set = |v: Vec<TableauFormula>| v.into_iter().collect::<HashSet<_>>();
    let mut ok = printed(&r.root, &c) == set([etas(&t1), etas(&t2)].concat());
    let chosen = [
        (lt(t1.clone(), q(0, 1)), le(t1.clone(), q(3, 4))),
        (le(q(1, 2), t1.clone()), le(t1.clone(), q(3, 4))),
        (lt(t1.clone(), q(0, 1)), le(q(1, 1), t1.clone())),
        (le(q(1, 2), t1.clone()), le(q(1, 1), t1.clone())),
    ];
    ok &= r.splits.len() == 4;
    for (child, (a, b)) in r.splits.iter().zip(chosen) {
        let mut want = vec![a, b];
        want.extend(etas(&t2));
        ok &= printed(child, &c) == set(want);
    }
    let (p, rr, a0, b0, a1, b1) =
        (v("p"), v("r"), Term::param("a0L"), Term::param("b0L"), Term::param("a1L"), Term::param("b1L"));
    let pr = Term::tnorm(p.clone(), rr.clone());
    let head = vec![le(q(1, 2), t2.clone()), le(q(1, 1), t2.clone())];
    let shifted = |x: Term| Term::add(Term::sub(b0.clone(), q(1, 1)), x);
    let m = Term::max(a1.clone(), Term::sub(Term::add(p.clone(), rr.clone()), b1.clone()));
    let chain = vec![le(q(0, 1), a0.clone()), lt(a0.clone(), b0.clone()), le(b0.clone(), q(1, 1))];
    let common: Vec<TableauFormula> = [
        chain.clone(),
        vec![
            eq(a0.clone(), a1.clone()),
            lt(a1.clone(), b1.clone()),
            eq(b1.clone(), b0.clone()),
            le(a1.clone(), p.clone()),
            le(p.clone(), b1.clone()),
            le(a1.clone(), rr.clone()),
            le(rr.clone(), b1.clone()),
            le(a0.clone(), m.clone()),
            lt(m.clone(), q(1, 1)),
            le(q(1, 1), b0.clone()),
            le(q(1, 2), shifted(m.clone())),
            le(shifted(m.clone()), q(3, 4)),
        ],
    ]
    .concat();
    let or_pq = Term::max(p.clone(), v("q"));
    let one_to = Term::resid(Term::one(), or_pq.clone());
    let expected = [
        [head.clone(), vec![le(q(1, 2), t1.clone()), le(t1.clone(), q(3, 4))]].concat(),
        [head.clone(), vec![le(q(1, 1), pr.clone()), le(q(1, 2), q(1, 1)), le(q(1, 1), q(3, 4))]].concat(),
        [
            head.clone(),
            chain,
            vec![
                le(a0.clone(), pr.clone()),
                lt(pr.clone(), q(1, 1)),
                le(q(1, 1), b0.clone()),
                le(q(1, 2), shifted(pr.clone())),
                le(shifted(pr.clone()), q(3, 4)),
            ],
        ]
        .concat(),
        [head, common.clone()].concat(),
        [common.clone(), vec![le(q(1, 1), rr.clone()), le(q(1, 2), one_to.clone()), le(q(1, 1), one_to)]].concat(),
        [common, vec![le(q(1, 1), rr), le(q(1, 1), or_pq), le(q(1, 2), q(1, 1)), le(q(1, 1), q(1, 1))]].concat(),
    ];
    let names = ["(124)", "(1241)", "(1242)", "(12421)", "(124211)", "(1242111)"];
    let mut mismatched = Vec::new();
    for ((node, want), name) in r.path.iter().zip(expected).zip(names) {
        if printed(node, &c) != set(want) {
            mismatched.push(name);
        }
    }
    ok &= mismatched.is_empty();
    let closed = check_constraints(&r.path[1].l0_constraints(&c).unwrap(), &SolverConfig::grid()).is_unsat();
    ok &= closed;
    ok &= select_active(&r.path[0]) == Some(t1);
    check(ok, format!("11 nodes compared, mismatches {mismatched:?}, (1241) closed: {closed}"))
}

fn two_component_node(active: Term) -> Node {
    let chain = component_cases(&ComponentChain::new(), Label::L).remove(0).chain;
    let chain = component_cases(&chain, Label::L).pop().unwrap().chain;
    let mut formulas = indexmap::IndexSet::new();
    formulas.insert(Comparison::le(active, Term::one()).into());
    let root = build_root(&[], &KSet::full(), &mut TranslationMap::new());
    Node { formulas, chain, pending_splits: Vec::new(), min_decisions: Vec::new(), provenance: root.provenance }
}

fn criterion_3() -> Outcome {
    let star = expand(&two_component_node(Term::tnorm(Term::var("x"), Term::var("y")))).len();
    let imp = expand(&two_component_node(Term::resid(Term::var("x"), Term::var("y")))).len();
    let split = split_children(&replay().root).len();
    check(star == 15 && imp == 16 && split == 4, format!("star {star}, implication {imp}, split {split}"))
}

fn always_one(psi: &Formula) -> bool {
    let grid: Vec<Rational> = (0..=8).map(|i| rat(i, 8)).collect();
    default_pool().iter().all(|t| {
        grid.iter().all(|a| {
            grid.iter().all(|b| {
                let val = [("p", a.clone()), ("q", b.clone())].iter().map(|(n, x)| (n.to_string(), x.clone())).collect();
                evaluate(psi, &ExtractedModel::new(t.clone(), val)) == Ok(rat(1, 1))
            })
        })
    })
}

fn criterion_4() -> Outcome {
    let k = parse_kset("[0,1)").unwrap();
    let cases = ["p -> p", "(p & q) -> (q & p)", "D p \\/ ~ D p"];
    if !cases.iter().all(|s| always_one(&f(s))) {
        return Outcome::Fail("oracle found a point where a formula is below 1".into());
    }
    if !smt_available() {
        return Outcome::Skip("no SMT solver answered (set BLSAT_SMT_CMD); the grid backend cannot close these".into());
    }
    let mut report = Vec::new();
    let mut ok = true;
    for s in cases {
        let start = Instant::now();
        let out = explore(&[f(s)], &k, &pruned(SolverConfig::smt()));
        let t = start.elapsed();
        ok &= out.verdict.is_unsat() && t < Duration::from_secs(60);
        report.push(format!("{s}: {} in {} ms", out.verdict.tag(), t.as_millis()));
    }
    check(ok, report.join("; "))
}

fn criterion_5() -> Outcome {
    let pool = common::kset_pool();
    let tnorms = default_pool();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let config = ExploreConfig { max_nodes: 4_000, deadline: Some(Duration::from_secs(5)), ..pruned(SolverConfig::grid()) };
    let (mut sat, mut unsat, mut unknown, mut oracle_sat, mut violations) = (0, 0, 0, 0, Vec::new());
    for i in 0..200 {
        let (psis, k) = common::random_instance(&mut rng, &pool);
        let oracle = grid_oracle(&psis, &k, 4, &tnorms);
        let out = explore(&psis, &k, &config);
        if matches!(oracle, OracleResult::Sat(_)) {
            oracle_sat += 1;
            if out.verdict.is_unsat() {
                violations.push(format!("#{i} unsat but oracle sat"));
            }
        }
        match out.verdict.model() {
            Some(m) => {
                sat += 1;
                if !verify_model(&psis, &k, m) {
                    violations.push(format!("#{i} model fails verification"));
                }
            }
            None if out.verdict.is_unsat() => unsat += 1,
            None => unknown += 1,
        }
    }
    check(
        violations.is_empty(),
        format!(
            "200 instances: {sat} sat, {unsat} unsat, {unknown} unknown; oracle sat on {oracle_sat}; violations {violations:?}"
        ),
    )
}

fn random_unit(rng: &mut impl Rng) -> Rational {
    let d = rng.gen_range(1..=24i64);
    rat(rng.gen_range(0..=d), d)
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut failures = Vec::new();

    let mut algebra = 0;
    for t in default_pool() {
        for _ in 0..500 {
            let (x, y, z) = (random_unit(&mut rng), random_unit(&mut rng), random_unit(&mut rng));
            let tn = |a: &Rational, b: &Rational| tnorm_apply(&t, a, b).unwrap();
            let ok = tn(&x, &y) == tn(&y, &x)
                && tn(&tn(&x, &y), &z) == tn(&x, &tn(&y, &z))
                && tn(&x, &rat(1, 1)) == x
                && (y > z || tn(&x, &y) <= tn(&x, &z))
                && ((tn(&x, &y) <= z) == (x <= residuum_apply(&t, &y, &z).unwrap()));
            algebra += 1;
            if !ok {
                failures.push(format!("t-norm {t:?} at ({x}, {y}, {z})"));
                break;
            }
        }
    }

    let pool = common::kset_pool();
    let mut partition = 0;
    for _ in 0..1000 {
        let k = &pool[rng.gen_range(0..pool.len())];
        let x = random_unit(&mut rng);
        let inside = contains(k, &x).unwrap();
        let in_gap = complement_intervals(k).iter().any(|j| j.contains(&x));
        partition += 1;
        if inside == in_gap {
            failures.push(format!("partition at {x}"));
            break;
        }
    }

    let mut etas = 0;
    for _ in 0..500 {
        let (a, b) = (random_unit(&mut rng), random_unit(&mut rng));
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (lc, hc) = (rng.gen_bool(0.5), rng.gen_bool(0.5));
        let Ok(j) = Interval::new(lo.clone(), hi.clone(), lc || lo == hi, hc || lo == hi) else { continue };
        let x = random_unit(&mut rng);
        let TableauFormula::Disjunct(below, above) = eta(&Term::var("x"), &j, 1) else { unreachable!() };
        let ends = Endpoints(vec![(lo, hi)]);
        let lookup = |_: &Symbol| Some(&x);
        let holds = holds_exact(&below, &ends, &lookup) == Some(true) || holds_exact(&above, &ends, &lookup) == Some(true);
        etas += 1;
        if holds == j.contains(&x) {
            failures.push(format!("eta for {x} and {j}"));
            break;
        }
    }

    // Every edge of the first few thousand nodes of each tree, solving
    // nothing: the measure drops on expansions and L0 formulas persist.
    let mut edges = 0;
    let (psis, k) = example();
    let mut instances = vec![(psis, k)];
    for _ in 0..60 {
        instances.push(common::random_instance(&mut rng, &pool));
    }
    for (psis, k) in &instances {
        let mut stack = vec![build_root(psis, k, &mut TranslationMap::new())];
        let mut seen = 0;
        while let Some(n) = stack.pop() {
            seen += 1;
            if seen > 3_000 {
                break;
            }
            for child in successors(&n) {
                edges += 1;
                let measured = child.provenance.rule == RuleTag::Split || child.measure() < n.measure();
                let monotone = n.l0_formulas().all(|c| child.contains_formula(&c.clone().into()));
                if !(measured && monotone) {
                    failures.push(format!("edge {} on {psis:?}", child.provenance.rule.tag()));
                }
                stack.push(child);
            }
        }
    }
    check(
        failures.is_empty() && etas >= 450,
        format!(
            "{algebra} t-norm triples, {partition} partition points, {etas} eta pairs, {edges} edges checked; failures {failures:?}"
        ),
    )
}

fn criterion_7() -> Outcome {
    let (solver, name) = if smt_available() { (SolverConfig::smt(), "smt") } else { (SolverConfig::grid(), "grid") };
    let start = Instant::now();
    let est = consistency_degree(&[f("p /\\ ~p")], DegreeMode::Weak, &rat(1, 16), &pruned(solver));
    let t = start.elapsed();
    let half = rat(1, 2);
    let ok = est.lo <= half && half <= est.hi && est.aborted.is_none() && &est.hi - &est.lo <= rat(1, 16) && t < Duration::from_secs(60);
    check(ok, format!("bracket [{}, {}] with {name} in {} ms", est.lo, est.hi, t.as_millis()))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("1 golden example", criterion_1),
        ("2 golden trace", criterion_2),
        ("3 fanout counts", criterion_3),
        ("4 validity closure", criterion_4),
        ("5 oracle agreement", criterion_5),
        ("6 property suites", criterion_6),
        ("7 degree bracket", criterion_7),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Outcome::Fail(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        let line = match &outcome {
            Outcome::Pass(d) => format!("[PASS] {name} ({secs:.1} s): {d}"),
            Outcome::Fail(d) => {
                failed.push(name);
                format!("[FAIL] {name} ({secs:.1} s): {d}")
            }
            Outcome::Skip(d) => format!("[SKIP] {name} ({secs:.1} s): {d}"),
        };
        // Written past the test harness's capture so the lines always show.
        let _ = writeln!(std::io::stdout().lock(), "acceptance {line}");
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
