//! `blsat`: decide K-satisfiability of a set of BL△∼ formulas.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use blsat_core::model::verify_report;
use blsat_core::tableau::explore;
use blsat_core::{
    consistency_degree, format_rational, parse_formula, parse_kset, parse_rational, Backend, DegreeEstimate,
    DegreeMode, ExploreConfig, Exploration, Formula, GridConfig, KSet, ModelRecord, Rational, SmtConfig,
    SolverConfig, Verdict,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

const EXIT_SAT: u8 = 0;
const EXIT_UNSAT: u8 = 1;
const EXIT_UNKNOWN: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_NO_INPUT: u8 = 66;
const EXIT_INTERNAL: u8 = 70;

#[derive(Parser, Debug)]
#[command(name = "blsat", version, about = "K-satisfiability for BL with Baaz delta and involutive negation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether the formulas are K-satisfiable.
    Solve(SolveArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum BackendChoice {
    Smt,
    Grid,
    /// SMT when the solver answers, otherwise grid.
    Auto,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Human,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum DegreeArg {
    Weak,
    Strong,
}

#[derive(clap::Args, Debug)]
struct SolveArgs {
    /// Formulas, e.g. "D r -> p \/ q".
    formulas: Vec<String>,
    /// Formula file, one per line; `#` starts a comment.
    #[arg(long)]
    file: Option<PathBuf>,
    /// The designated set, e.g. "[1/2,3/4] u {1}".
    #[arg(long, required_unless_present_any = ["weak", "strong", "degree"], conflicts_with_all = ["weak", "strong", "degree"])]
    k: Option<String>,
    /// Decide [r,1]-satisfiability.
    #[arg(long, value_name = "R", conflicts_with_all = ["strong", "degree"])]
    weak: Option<String>,
    /// Decide {r}-satisfiability.
    #[arg(long, value_name = "R", conflicts_with = "degree")]
    strong: Option<String>,
    /// Bracket the consistency degree.
    #[arg(long, value_enum, requires = "tol")]
    degree: Option<DegreeArg>,
    /// Bracket width for --degree.
    #[arg(long, value_name = "Q")]
    tol: Option<String>,
    #[arg(long, value_enum, default_value = "auto")]
    backend: BackendChoice,
    /// Solver command line; defaults to $BLSAT_SMT_CMD, then "z3 -in".
    #[arg(long)]
    smt_cmd: Option<String>,
    /// Seconds allowed per solver query.
    #[arg(long, value_name = "SECS")]
    timeout: Option<f64>,
    #[arg(long, value_name = "D")]
    grid_denominator: Option<u32>,
    /// Cut branches whose constraints are already unsolvable.
    #[arg(long)]
    prune: bool,
    /// Write the search edges as JSON lines.
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

enum Mode {
    KSat(KSet),
    Weak(Rational),
    Strong(Rational),
    Degree(DegreeMode, Rational),
}

#[derive(Serialize)]
struct StatsOut {
    nodes: usize,
    leaves: usize,
    solver_calls: usize,
    elapsed_ms: u128,
}

#[derive(Serialize)]
struct SolveOut {
    verdict: &'static str,
    model: Option<ModelRecord>,
    backend: &'static str,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    reasons: Vec<String>,
    stats: StatsOut,
}

#[derive(Serialize)]
struct DegreeOut {
    verdict: &'static str,
    mode: DegreeMode,
    lo: String,
    hi: String,
    lo_confirmed: bool,
    attained: Option<bool>,
    monotone: bool,
    aborted: Option<String>,
    probes: Vec<(String, &'static str)>,
    backend: &'static str,
}

fn rational_arg(flag: &str, text: &str) -> Result<Rational, Failure> {
    parse_rational(text).ok_or_else(|| Failure::new(EXIT_USAGE, format!("--{flag}: `{text}` is not a rational")))
}

fn unit_arg(flag: &str, text: &str) -> Result<Rational, Failure> {
    let r = rational_arg(flag, text)?;
    if r < Rational::from_integer(0.into()) || r > Rational::from_integer(1.into()) {
        return Err(Failure::new(EXIT_USAGE, format!("--{flag}: {text} lies outside [0,1]")));
    }
    Ok(r)
}

fn read_formulas(args: &SolveArgs) -> Result<Vec<Formula>, Failure> {
    let mut sources: Vec<(String, String)> = Vec::new();
    if let Some(path) = &args.file {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::new(EXIT_NO_INPUT, format!("{}: {e}", path.display())))?;
        for (i, line) in text.lines().enumerate() {
            let body = line.split('#').next().unwrap_or("").trim();
            if !body.is_empty() {
                sources.push((format!("{}:{}", path.display(), i + 1), body.to_string()));
            }
        }
    }
    for (i, f) in args.formulas.iter().enumerate() {
        sources.push((format!("argument {}", i + 1), f.clone()));
    }
    sources
        .iter()
        .map(|(at, text)| {
            parse_formula(text).map_err(|e| Failure::new(EXIT_DATA, format!("{at}: {e}\n  {text}\n  {:>w$}", "^", w = e.position + 1)))
        })
        .collect()
}

fn mode(args: &SolveArgs) -> Result<Mode, Failure> {
    if let Some(r) = &args.weak {
        return Ok(Mode::Weak(unit_arg("weak", r)?));
    }
    if let Some(r) = &args.strong {
        return Ok(Mode::Strong(unit_arg("strong", r)?));
    }
    if let Some(d) = args.degree {
        let tol = rational_arg("tol", args.tol.as_deref().unwrap_or_default())?;
        if tol <= Rational::from_integer(0.into()) {
            return Err(Failure::new(EXIT_USAGE, "--tol must be positive"));
        }
        let d = match d {
            DegreeArg::Weak => DegreeMode::Weak,
            DegreeArg::Strong => DegreeMode::Strong,
        };
        return Ok(Mode::Degree(d, tol));
    }
    let text = args.k.as_deref().unwrap_or_default();
    let k = parse_kset(text).map_err(|e| Failure::new(EXIT_DATA, format!("--k: {e}")))?;
    Ok(Mode::KSat(k))
}

fn solver(args: &SolveArgs) -> Result<SolverConfig, Failure> {
    let mut smt = match &args.smt_cmd {
        Some(cmd) if cmd.trim().is_empty() => return Err(Failure::new(EXIT_USAGE, "--smt-cmd is empty")),
        Some(cmd) => SmtConfig::new(cmd),
        None => SmtConfig::default(),
    };
    if let Some(secs) = args.timeout {
        if !(secs.is_finite() && secs > 0.0) {
            return Err(Failure::new(EXIT_USAGE, "--timeout must be a positive number of seconds"));
        }
        smt.timeout = Duration::from_secs_f64(secs);
    }
    let mut grid = SolverConfig::grid();
    if let Some(d) = args.grid_denominator {
        if d == 0 {
            return Err(Failure::new(EXIT_USAGE, "--grid-denominator must be positive"));
        }
        grid.backend = Backend::Grid(GridConfig { denominator: d, ..GridConfig::default() });
    }
    let use_smt = match args.backend {
        BackendChoice::Smt => true,
        BackendChoice::Grid => false,
        BackendChoice::Auto => smt.available(),
    };
    Ok(if use_smt { SolverConfig { backend: Backend::Smt(smt), ..SolverConfig::smt() } } else { grid })
}

fn backend_name(config: &SolverConfig) -> &'static str {
    match config.backend {
        Backend::Smt(_) => "smt",
        Backend::Grid(_) => "grid",
    }
}

fn write_trace(path: &PathBuf, out: &Exploration) -> Result<(), Failure> {
    let fail = |e: io::Error| Failure::new(EXIT_INTERNAL, format!("{}: {e}", path.display()));
    let mut w = BufWriter::new(fs::File::create(path).map_err(fail)?);
    for edge in &out.trace {
        serde_json::to_writer(&mut w, edge).map_err(|e| fail(e.into()))?;
        w.write_all(b"\n").map_err(fail)?;
    }
    w.flush().map_err(fail)
}

fn print_solve(out: &SolveOut, format: Format) {
    match format {
        Format::Json => println!("{}", serde_json::to_string(out).expect("serializable")),
        Format::Human => {
            println!("verdict: {}", out.verdict);
            if let Some(m) = &out.model {
                let tnorm: Vec<String> = m.components.iter().map(|c| format!("{:?}[{}, {}]", c.kind, c.lo, c.hi)).collect();
                if tnorm.is_empty() {
                    println!("t-norm: minimum");
                } else {
                    println!("t-norm: ordinal sum of {} (minimum elsewhere)", tnorm.join(", "));
                }
                for (atom, v) in &m.valuation {
                    println!("  {atom} = {v}");
                }
                if !m.exact {
                    println!("  (values are approximate)");
                }
            }
            for r in &out.reasons {
                println!("reason: {r}");
            }
            let s = &out.stats;
            println!(
                "backend {}, {} nodes, {} leaves, {} solver calls, {} ms",
                out.backend, s.nodes, s.leaves, s.solver_calls, s.elapsed_ms
            );
        }
    }
}

fn print_degree(out: &DegreeOut, format: Format) {
    match format {
        Format::Json => println!("{}", serde_json::to_string(out).expect("serializable")),
        Format::Human => {
            println!("degree ({:?}): [{}, {}]", out.mode, out.lo, out.hi);
            if let Some(a) = out.attained {
                println!("attained: {a}");
            }
            if !out.monotone {
                println!("note: strong satisfiability is not monotone in r; the bracket is a bisection result only");
            }
            if let Some(why) = &out.aborted {
                println!("aborted: {why}");
            }
        }
    }
}

fn run_degree(psis: &[Formula], d: DegreeMode, tol: &Rational, config: &ExploreConfig, args: &SolveArgs) -> u8 {
    let est: DegreeEstimate = consistency_degree(psis, d, tol, config);
    let out = DegreeOut {
        verdict: if est.aborted.is_some() { "unknown" } else { "bracket" },
        mode: est.mode,
        lo: format_rational(&est.lo),
        hi: format_rational(&est.hi),
        lo_confirmed: est.lo_confirmed,
        attained: est.attained,
        monotone: est.monotone,
        aborted: est.aborted.clone(),
        probes: est.probes.iter().map(|(r, v)| (format_rational(r), *v)).collect(),
        backend: backend_name(&config.solver),
    };
    print_degree(&out, args.format);
    if est.aborted.is_some() {
        EXIT_UNKNOWN
    } else {
        EXIT_SAT
    }
}

fn run(args: SolveArgs) -> Result<u8, Failure> {
    let mode = mode(&args)?;
    let psis = read_formulas(&args)?;
    let solver = solver(&args)?;
    let config = ExploreConfig { solver, prune: args.prune, record_trace: args.trace.is_some(), ..ExploreConfig::default() };
    let k = match mode {
        Mode::Degree(d, tol) => return Ok(run_degree(&psis, d, &tol, &config, &args)),
        Mode::KSat(k) => k,
        Mode::Weak(r) => KSet::at_least(r).expect("checked range"),
        Mode::Strong(r) => KSet::singleton(r).expect("checked range"),
    };
    let out = explore(&psis, &k, &config);
    if let Some(path) = &args.trace {
        write_trace(path, &out)?;
    }
    let (code, model, reasons) = match &out.verdict {
        Verdict::Satisfiable { model, .. } => {
            let report = verify_report(&psis, &k, model);
            if !report.ok {
                let failed: Vec<String> = report.failures.iter().map(|(f, _)| f.to_string()).collect();
                return Err(Failure::new(EXIT_INTERNAL, format!("model failed re-verification on {}", failed.join(", "))));
            }
            (EXIT_SAT, Some(model.record()), Vec::new())
        }
        Verdict::Unsatisfiable => (EXIT_UNSAT, None, Vec::new()),
        Verdict::Unknown { reasons } => (EXIT_UNKNOWN, None, reasons.clone()),
    };
    let s = &out.stats;
    let result = SolveOut {
        verdict: out.verdict.tag(),
        model,
        backend: backend_name(&config.solver),
        reasons,
        stats: StatsOut { nodes: s.nodes, leaves: s.leaves, solver_calls: s.solver_calls, elapsed_ms: s.elapsed_ms },
    };
    print_solve(&result, args.format);
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let Command::Solve(args) = cli.command;
    match run(args) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("blsat: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
