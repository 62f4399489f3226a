//! SMT-LIB 2 (QF_NRA) encoding and a subprocess client for an external
//! solver such as z3.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use indexmap::IndexMap;
use num_traits::{Signed, Zero};

use super::{ConstraintSet, Exactness, SmtConfig, Solution, SolverResult};
use crate::ratio::{parse_rational, Rational};
use crate::term::{BinOp, CmpOp, Symbol, Term};

fn smt_name(s: &Symbol) -> String {
    match s {
        Symbol::Var(v) => format!("v_{v}"),
        Symbol::Param(p) => format!("p_{p}"),
    }
}

fn smt_literal(q: &Rational) -> String {
    let abs = q.abs();
    let body = if abs.is_integer() {
        format!("{}.0", abs.numer())
    } else {
        format!("(/ {}.0 {}.0)", abs.numer(), abs.denom())
    };
    if q.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

struct Encoder<'a> {
    e: &'a ConstraintSet,
    divisions: IndexMap<Term, String>,
}

impl Encoder<'_> {
    /// Registers every division below `t` in post-order.
    fn collect_divisions(&mut self, t: &Term) {
        match t {
            Term::Bin(op, l, r) => {
                self.collect_divisions(l);
                self.collect_divisions(r);
                if *op == BinOp::Div && !self.divisions.contains_key(t) {
                    let name = format!("div_{}", self.divisions.len());
                    self.divisions.insert(t.clone(), name);
                }
            }
            Term::Delta(s) => self.collect_divisions(s),
            _ => {}
        }
    }

    fn term(&self, t: &Term) -> String {
        match t {
            Term::Var(_) | Term::Param(_) => smt_name(&t.as_symbol().expect("symbol")),
            Term::Const(q) => smt_literal(q),
            Term::Endpoint(side, i) => {
                smt_literal(self.e.endpoints().get(*side, *i).expect("endpoint of the complement"))
            }
            Term::Bin(BinOp::Div, ..) => self.divisions[t].clone(),
            Term::Bin(op, l, r) => {
                let (a, b) = (self.term(l), self.term(r));
                match op {
                    BinOp::Add => format!("(+ {a} {b})"),
                    BinOp::Sub => format!("(- {a} {b})"),
                    BinOp::Mul => format!("(* {a} {b})"),
                    BinOp::Min => format!("(ite (<= {a} {b}) {a} {b})"),
                    BinOp::Max => format!("(ite (<= {a} {b}) {b} {a})"),
                    BinOp::Div => unreachable!(),
                    BinOp::TNorm | BinOp::Resid => panic!("interpreted term in an L0 constraint set"),
                }
            }
            Term::Delta(_) => panic!("interpreted term in an L0 constraint set"),
        }
    }
}

/// The QF_NRA problem for `e`. Output is deterministic: symbols are
/// declared in sorted order and divisions are numbered in post-order.
pub fn encode(e: &ConstraintSet) -> String {
    let mut enc = Encoder { e, divisions: IndexMap::new() };
    for c in e.atoms() {
        enc.collect_divisions(&c.lhs);
        enc.collect_divisions(&c.rhs);
    }
    let mut out = String::from("(set-logic QF_NRA)\n");
    for s in e.symbols() {
        let n = smt_name(&s);
        let _ = writeln!(out, "(declare-fun {n} () Real)");
        let _ = writeln!(out, "(assert (and (<= 0.0 {n}) (<= {n} 1.0)))");
    }
    for (t, q) in &enc.divisions {
        let Term::Bin(_, u, w) = t else { unreachable!() };
        let (u, w) = (enc.term(u), enc.term(w));
        let _ = writeln!(out, "(declare-fun {q} () Real)");
        let _ = writeln!(out, "(assert (=> (not (= {w} 0.0)) (= (* {q} {w}) {u})))");
        let _ = writeln!(out, "(assert (=> (= {w} 0.0) (= {q} 0.0)))");
    }
    for c in e.atoms() {
        let op = match c.op {
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Eq => "=",
        };
        let _ = writeln!(out, "(assert ({op} {} {}))", enc.term(&c.lhs), enc.term(&c.rhs));
    }
    out.push_str("(check-sat)\n(get-model)\n");
    out
}

/// Runs `command` on `input`, killing it after `timeout`.
fn run(command: &[String], input: String, timeout: Duration) -> Result<String, String> {
    let (prog, args) = command.split_first().ok_or("empty solver command")?;
    let mut child = Command::new(prog)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|err| format!("cannot launch `{}`: {err}", command.join(" ")))?;
    let mut stdin = child.stdin.take().expect("piped stdin");
    let mut stdout = child.stdout.take().expect("piped stdout");
    let writer = thread::spawn(move || {
        let _ = stdin.write_all(input.as_bytes());
    });
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let mut buf = String::new();
        let res = stdout.read_to_string(&mut buf).map(|_| buf);
        let _ = tx.send(res);
    });
    let result = match rx.recv_timeout(timeout) {
        Ok(Ok(text)) => Ok(text),
        Ok(Err(err)) => Err(format!("reading solver output: {err}")),
        Err(_) => {
            let _ = child.kill();
            Err(format!("solver timed out after {:?}", timeout))
        }
    };
    let _ = writer.join();
    let _ = child.wait();
    result
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn parse_sexps(text: &str) -> Vec<Sexp> {
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '(' => {
                chars.next();
                stack.push(Vec::new());
            }
            ')' => {
                chars.next();
                if stack.len() > 1 {
                    let done = stack.pop().expect("open list");
                    stack.last_mut().expect("outer list").push(Sexp::List(done));
                }
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                for c in chars.by_ref() {
                    if c == '"' {
                        break;
                    }
                    s.push(c);
                }
                stack.last_mut().expect("list").push(Sexp::Atom(s));
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c == '(' || c == ')' || c.is_whitespace() {
                        break;
                    }
                    s.push(c);
                    chars.next();
                }
                stack.last_mut().expect("list").push(Sexp::Atom(s));
            }
        }
    }
    while stack.len() > 1 {
        let done = stack.pop().expect("open list");
        stack.last_mut().expect("outer list").push(Sexp::List(done));
    }
    stack.pop().unwrap_or_default()
}

/// A model value with a flag telling whether it was rounded.
fn value(s: &Sexp) -> Option<(Rational, bool)> {
    match s {
        Sexp::Atom(a) => {
            let (digits, approx) = match a.strip_suffix('?') {
                Some(d) => (d, true),
                None => (a.as_str(), false),
            };
            parse_rational(digits).map(|q| (q, approx))
        }
        Sexp::List(items) => {
            let (Sexp::Atom(head), args) = items.split_first()? else {
                return None;
            };
            let vals: Option<Vec<(Rational, bool)>> = args.iter().map(value).collect();
            let vals = vals?;
            let approx = vals.iter().any(|(_, a)| *a);
            let mut it = vals.into_iter().map(|(q, _)| q);
            let q = match (head.as_str(), args.len()) {
                ("-", 1) => -it.next()?,
                ("-", _) => {
                    let first = it.next()?;
                    it.fold(first, |acc, q| acc - q)
                }
                ("+", _) => it.fold(Rational::zero(), |acc, q| acc + q),
                ("*", _) => it.fold(Rational::from_integer(1.into()), |acc, q| acc * q),
                ("/", 2) => {
                    let n = it.next()?;
                    let d = it.next()?;
                    if d.is_zero() {
                        return None;
                    }
                    n / d
                }
                _ => return None,
            };
            Some((q, approx))
        }
    }
}

/// `define-fun` entries of a `(model …)` or bare model list.
fn model_entries(s: &Sexp) -> Option<BTreeMap<String, &Sexp>> {
    let Sexp::List(items) = s else { return None };
    let mut out = BTreeMap::new();
    for item in items {
        match item {
            Sexp::Atom(a) if a == "model" => {}
            Sexp::List(def) => match def.as_slice() {
                [Sexp::Atom(kw), Sexp::Atom(name), Sexp::List(args), _sort, body]
                    if kw == "define-fun" && args.is_empty() =>
                {
                    out.insert(name.clone(), body);
                }
                _ => {}
            },
            _ => return None,
        }
    }
    Some(out)
}

/// Solves `e` with the configured external solver. Irrational values are
/// read from a second, decimal model and flagged approximate.
pub fn solve(e: &ConstraintSet, config: &SmtConfig) -> SolverResult {
    let mut input = encode(e);
    input.push_str("(set-option :pp.decimal true)\n(set-option :pp.decimal_precision 30)\n(get-model)\n");
    let text = match run(&config.command, input, config.timeout) {
        Ok(t) => t,
        Err(msg) => return SolverResult::Unknown(msg),
    };
    let sexps = parse_sexps(&text);
    let status = match sexps.first() {
        Some(Sexp::Atom(a)) => a.as_str(),
        _ => return SolverResult::Unknown(format!("unexpected solver output: {}", text.trim())),
    };
    match status {
        "unsat" => return SolverResult::Unsat,
        "sat" => {}
        "unknown" => return SolverResult::Unknown("solver answered unknown".into()),
        other => return SolverResult::Unknown(format!("unexpected solver answer `{other}`")),
    }
    let models: Vec<BTreeMap<String, &Sexp>> = sexps[1..].iter().filter_map(model_entries).collect();
    let mut sol = Solution::exact();
    for s in e.symbols() {
        let name = smt_name(&s);
        let mut found = None;
        for m in &models {
            if let Some(v) = m.get(&name).and_then(|body| value(body)) {
                found = Some(v);
                break;
            }
        }
        let (q, approx) = match found {
            Some(v) => v,
            None if models.iter().any(|m| m.contains_key(&name)) => {
                return SolverResult::Unknown(format!("cannot read the value of `{name}`"));
            }
            None => (Rational::zero(), false),
        };
        if approx {
            sol.exactness = Exactness::approximate();
        }
        sol.set(&s, q);
    }
    SolverResult::Sat(sol)
}
