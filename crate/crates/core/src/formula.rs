//! Propositional formulas of BL extended with the Baaz delta and an
//! involutive negation, together with their single-line ASCII syntax.
//!
//! | connective          | text  |
//! |---------------------|-------|
//! | strong conjunction  | `&`   |
//! | weak conjunction    | `/\`  |
//! | disjunction         | `\/`  |
//! | implication         | `->`  |
//! | involutive negation | `~`   |
//! | Baaz delta          | `D`   |
//! | falsum / verum      | `0` / `1` |
//!
//! Unary operators bind tightest, then `&`, `/\`, `\/`, and finally `->`,
//! which associates to the right. The binary conjunctions and disjunction
//! associate to the left.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Formula {
    Atom(String),
    Falsum,
    Verum,
    Strong(Box<Formula>, Box<Formula>),
    Impl(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Delta(Box<Formula>),
    Inv(Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    pub fn strong(l: Formula, r: Formula) -> Self {
        Formula::Strong(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Self {
        Formula::Impl(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn delta(f: Formula) -> Self {
        Formula::Delta(Box::new(f))
    }

    pub fn inv(f: Formula) -> Self {
        Formula::Inv(Box::new(f))
    }

    /// Atom names in order of first occurrence (left to right).
    pub fn atoms(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.collect_atoms(&mut seen, &mut out);
        out
    }

    fn collect_atoms(&self, seen: &mut BTreeSet<String>, out: &mut Vec<String>) {
        match self {
            Formula::Atom(name) => {
                if seen.insert(name.clone()) {
                    out.push(name.clone());
                }
            }
            Formula::Falsum | Formula::Verum => {}
            Formula::Strong(l, r) | Formula::Impl(l, r) | Formula::Or(l, r) | Formula::And(l, r) => {
                l.collect_atoms(seen, out);
                r.collect_atoms(seen, out);
            }
            Formula::Delta(f) | Formula::Inv(f) => f.collect_atoms(seen, out),
        }
    }

    /// Number of connectives (atoms and constants count zero).
    pub fn connectives(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Falsum | Formula::Verum => 0,
            Formula::Strong(l, r) | Formula::Impl(l, r) | Formula::Or(l, r) | Formula::And(l, r) => {
                1 + l.connectives() + r.connectives()
            }
            Formula::Delta(f) | Formula::Inv(f) => 1 + f.connectives(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at offset {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl ParseError {
    fn new(position: usize, message: impl Into<String>) -> Self {
        ParseError {
            position,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Zero,
    One,
    Tilde,
    Delta,
    Amp,
    Wedge,
    Vee,
    Arrow,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("atom `{s}`"),
            Tok::Zero => "`0`".into(),
            Tok::One => "`1`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Delta => "`D`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Wedge => "`/\\`".into(),
            Tok::Vee => "`\\/`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'0' => Tok::Zero,
            b'1' => Tok::One,
            b'~' => Tok::Tilde,
            b'&' => Tok::Amp,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'D' => Tok::Delta,
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Arrow
            }
            b'/' if bytes.get(i + 1) == Some(&b'\\') => {
                i += 1;
                Tok::Wedge
            }
            b'\\' if bytes.get(i + 1) == Some(&b'/') => {
                i += 1;
                Tok::Vee
            }
            b'a'..=b'z' => {
                while i + 1 < bytes.len() && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_') {
                    i += 1;
                }
                Tok::Ident(text[start..=i].to_string())
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError::new(start, format!("unexpected character `{ch}`")));
            }
        };
        toks.push((start, tok));
        i += 1;
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.implication()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.conjunction()?;
        while self.eat(&Tok::Vee) {
            acc = Formula::or(acc, self.conjunction()?);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.strong()?;
        while self.eat(&Tok::Wedge) {
            acc = Formula::and(acc, self.strong()?);
        }
        Ok(acc)
    }

    fn strong(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        while self.eat(&Tok::Amp) {
            acc = Formula::strong(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let at = self.offset();
        let Some(tok) = self.peek().cloned() else {
            return Err(ParseError::new(at, "unexpected end of input"));
        };
        self.pos += 1;
        match tok {
            Tok::Tilde => Ok(Formula::inv(self.unary()?)),
            Tok::Delta => {
                // `D` is only ever a prefix operator; anything that cannot
                // start an operand means it was meant as an atom.
                match self.peek() {
                    Some(Tok::Ident(_) | Tok::Zero | Tok::One | Tok::Tilde | Tok::Delta | Tok::LParen) => {
                        Ok(Formula::delta(self.unary()?))
                    }
                    _ => Err(ParseError::new(at, "`D` is reserved for the delta operator and cannot name an atom")),
                }
            }
            Tok::Ident(name) => Ok(Formula::Atom(name)),
            Tok::Zero => Ok(Formula::Falsum),
            Tok::One => Ok(Formula::Verum),
            Tok::LParen => {
                let inner = self.implication()?;
                if !self.eat(&Tok::RParen) {
                    return Err(ParseError::new(self.offset(), "expected `)`"));
                }
                Ok(inner)
            }
            other => Err(ParseError::new(at, format!("expected a formula, found {}", other.describe()))),
        }
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let f = p.implication()?;
    if let Some(tok) = p.peek() {
        return Err(ParseError::new(
            p.offset(),
            format!("unexpected {} after complete formula", tok.describe()),
        ));
    }
    Ok(f)
}

// Binding strength, higher binds tighter.
fn level(f: &Formula) -> u8 {
    match f {
        Formula::Impl(..) => 1,
        Formula::Or(..) => 2,
        Formula::And(..) => 3,
        Formula::Strong(..) => 4,
        _ => 5,
    }
}

fn write_operand(out: &mut String, f: &Formula, parens: bool) {
    if parens {
        out.push('(');
        write_formula(out, f);
        out.push(')');
    } else {
        write_formula(out, f);
    }
}

fn write_formula(out: &mut String, f: &Formula) {
    let lvl = level(f);
    match f {
        Formula::Atom(name) => out.push_str(name),
        Formula::Falsum => out.push('0'),
        Formula::Verum => out.push('1'),
        Formula::Delta(sub) => {
            out.push_str("D ");
            write_operand(out, sub, level(sub) < 5);
        }
        Formula::Inv(sub) => {
            out.push('~');
            write_operand(out, sub, level(sub) < 5);
        }
        Formula::Impl(l, r) => {
            write_operand(out, l, level(l) <= lvl);
            out.push_str(" -> ");
            write_operand(out, r, level(r) < lvl);
        }
        Formula::Or(l, r) | Formula::And(l, r) | Formula::Strong(l, r) => {
            let op = match f {
                Formula::Or(..) => " \\/ ",
                Formula::And(..) => " /\\ ",
                _ => " & ",
            };
            write_operand(out, l, level(l) < lvl);
            out.push_str(op);
            write_operand(out, r, level(r) <= lvl);
        }
    }
}

/// Text that [`parse_formula`] maps back to `f`, using as few parentheses
/// as the precedence rules allow.
pub fn render_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(&mut out, f);
    out
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_formula(self))
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> Formula {
        Formula::atom(s)
    }

    #[test]
    fn parses_example_formulas() {
        assert_eq!(
            parse_formula("1 -> p & r").unwrap(),
            Formula::implies(Formula::Verum, Formula::strong(p("p"), p("r")))
        );
        assert_eq!(
            parse_formula("D r -> p \\/ q").unwrap(),
            Formula::implies(Formula::delta(p("r")), Formula::or(p("p"), p("q")))
        );
        assert_eq!(parse_formula("p").unwrap(), p("p"));
        assert_eq!(parse_formula("~~q").unwrap(), Formula::inv(Formula::inv(p("q"))));
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(
            parse_formula("a -> b -> c").unwrap(),
            Formula::implies(p("a"), Formula::implies(p("b"), p("c")))
        );
        assert_eq!(
            parse_formula("~a & b").unwrap(),
            Formula::strong(Formula::inv(p("a")), p("b"))
        );
        assert_eq!(
            parse_formula("a \\/ b /\\ c & d").unwrap(),
            Formula::or(p("a"), Formula::and(p("b"), Formula::strong(p("c"), p("d"))))
        );
        assert_eq!(
            parse_formula("a & b & c").unwrap(),
            Formula::strong(Formula::strong(p("a"), p("b")), p("c"))
        );
        assert_eq!(parse_formula("Dr").unwrap(), Formula::delta(p("r")));
    }

    #[test]
    fn renders_minimal_parens() {
        let f = Formula::implies(Formula::Verum, Formula::strong(p("p"), p("r")));
        assert_eq!(render_formula(&f), "1 -> p & r");
        assert_eq!(render_formula(&p("p")), "p");
        assert_eq!(render_formula(&Formula::delta(Formula::inv(p("q")))), "D ~q");
        let nested = Formula::implies(Formula::implies(p("a"), p("b")), p("c"));
        assert_eq!(render_formula(&nested), "(a -> b) -> c");
        let right = Formula::strong(p("a"), Formula::strong(p("b"), p("c")));
        assert_eq!(render_formula(&right), "a & (b & c)");
        assert_eq!(render_formula(&Formula::inv(Formula::or(p("a"), p("b")))), "~(a \\/ b)");
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_formula("p & ").unwrap_err();
        assert_eq!(err.position, 4);
        let err = parse_formula("p q").unwrap_err();
        assert_eq!(err.position, 2);
        let err = parse_formula("(p -> q").unwrap_err();
        assert!(err.message.contains(")"));
        assert!(parse_formula("P").is_err());
        assert!(parse_formula("p -> ").is_err());
        assert!(parse_formula("").is_err());
    }

    #[test]
    fn reserved_delta_token() {
        let err = parse_formula("D -> p").unwrap_err();
        assert!(err.message.contains("reserved"), "{err}");
        assert_eq!(err.position, 0);
        assert!(parse_formula("p & D").is_err());
        assert!(parse_formula("DX").is_err());
    }

    #[test]
    fn atoms_in_first_occurrence_order() {
        let f = parse_formula("(q -> p) & q \\/ r").unwrap();
        assert_eq!(f.atoms(), vec!["q", "p", "r"]);
        assert_eq!(f.connectives(), 3);
    }

    pub(crate) fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            Just(Formula::Falsum),
            Just(Formula::Verum),
            "[a-z][a-z0-9_]{0,3}".prop_map(Formula::Atom),
        ];
        leaf.prop_recursive(8, 64, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::strong(l, r)),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::implies(l, r)),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::or(l, r)),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::and(l, r)),
                inner.clone().prop_map(Formula::delta),
                inner.prop_map(Formula::inv),
            ]
        })
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(f in arb_formula()) {
            let text = render_formula(&f);
            prop_assert_eq!(parse_formula(&text).unwrap(), f);
        }
    }
}
