//! Truth-value sets `K ⊆ [0,1]` as finite unions of rational intervals, and
//! the decomposition of their complement into maximal disjoint intervals.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::ratio::{format_rational, one, parse_rational, zero, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KSetError {
    #[error("syntax error at offset {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("endpoint {0} lies outside [0,1]")]
    OutOfRange(String),
    #[error("interval {0} is empty")]
    Empty(String),
    #[error("value {0} lies outside [0,1]")]
    ValueOutOfRange(String),
}

/// A nonempty subinterval of `[0,1]` with rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
    lo_closed: bool,
    hi_closed: bool,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational, lo_closed: bool, hi_closed: bool) -> Result<Self, KSetError> {
        let candidate = Interval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        };
        for end in [&candidate.lo, &candidate.hi] {
            if *end < zero() || *end > one() {
                return Err(KSetError::OutOfRange(format_rational(end)));
            }
        }
        match candidate.lo.cmp(&candidate.hi) {
            Ordering::Greater => Err(KSetError::Empty(candidate.to_string())),
            Ordering::Equal if !(lo_closed && hi_closed) => Err(KSetError::Empty(candidate.to_string())),
            _ => Ok(candidate),
        }
    }

    pub fn closed(lo: Rational, hi: Rational) -> Result<Self, KSetError> {
        Self::new(lo, hi, true, true)
    }

    pub fn point(v: Rational) -> Result<Self, KSetError> {
        Self::new(v.clone(), v, true, true)
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn lo_closed(&self) -> bool {
        self.lo_closed
    }

    pub fn hi_closed(&self) -> bool {
        self.hi_closed
    }

    pub fn contains(&self, v: &Rational) -> bool {
        let above = if self.lo_closed { *v >= self.lo } else { *v > self.lo };
        let below = if self.hi_closed { *v <= self.hi } else { *v < self.hi };
        above && below
    }

    /// True when `[lo', hi']` (closed) lies inside this interval.
    pub fn contains_range(&self, lo: &Rational, hi: &Rational) -> bool {
        self.contains(lo) && self.contains(hi)
    }

    // Whether `self ∪ next` is an interval, given `self.lo <= next.lo`.
    fn touches(&self, next: &Interval) -> bool {
        match next.lo.cmp(&self.hi) {
            Ordering::Less => true,
            Ordering::Equal => self.hi_closed || next.lo_closed,
            Ordering::Greater => false,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            return write!(f, "{{{}}}", format_rational(&self.lo));
        }
        write!(
            f,
            "{}{},{}{}",
            if self.lo_closed { '[' } else { '(' },
            format_rational(&self.lo),
            format_rational(&self.hi),
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

/// A canonical finite union of intervals: sorted, pairwise disjoint and
/// never adjacent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct KSet {
    parts: Vec<Interval>,
}

impl KSet {
    pub fn empty() -> Self {
        KSet { parts: Vec::new() }
    }

    pub fn full() -> Self {
        KSet::from_intervals(vec![Interval::closed(zero(), one()).expect("[0,1] is valid")])
    }

    /// `[r,1]`.
    pub fn at_least(r: Rational) -> Result<Self, KSetError> {
        Ok(KSet::from_intervals(vec![Interval::closed(r, one())?]))
    }

    /// `{r}`.
    pub fn singleton(r: Rational) -> Result<Self, KSetError> {
        Ok(KSet::from_intervals(vec![Interval::point(r)?]))
    }

    pub fn from_intervals(mut parts: Vec<Interval>) -> Self {
        parts.sort_by(|a, b| a.lo.cmp(&b.lo).then(b.lo_closed.cmp(&a.lo_closed)));
        let mut merged: Vec<Interval> = Vec::with_capacity(parts.len());
        for part in parts {
            match merged.last_mut() {
                Some(last) if last.touches(&part) => match part.hi.cmp(&last.hi) {
                    Ordering::Greater => {
                        last.hi = part.hi;
                        last.hi_closed = part.hi_closed;
                    }
                    Ordering::Equal => last.hi_closed |= part.hi_closed,
                    Ordering::Less => {}
                },
                _ => merged.push(part),
            }
        }
        KSet { parts: merged }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, v: &Rational) -> Result<bool, KSetError> {
        if *v < zero() || *v > one() {
            return Err(KSetError::ValueOutOfRange(format_rational(v)));
        }
        Ok(self.parts.iter().any(|p| p.contains(v)))
    }

    /// Whether every point of the closed range `[lo, hi]` is in the set.
    /// Ranges that reach outside `[0,1]` are never contained.
    pub fn contains_range(&self, lo: &Rational, hi: &Rational) -> bool {
        self.parts.iter().any(|p| p.contains_range(lo, hi))
    }

    pub fn complement(&self) -> KSet {
        KSet {
            parts: complement_intervals(self),
        }
    }
}

impl fmt::Display for KSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return f.write_str("{}");
        }
        for (i, part) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str(" u ")?;
            }
            write!(f, "{part}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for KSet {
    type Err = KSetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_kset(s)
    }
}

/// Maximal disjoint intervals whose union is `[0,1] − k`, ascending.
pub fn complement_intervals(k: &KSet) -> Vec<Interval> {
    let mut out = Vec::new();
    // Left end of the next gap, and whether that point itself is uncovered.
    let mut cursor = zero();
    let mut cursor_open_for_gap = true;
    for part in &k.parts {
        push_gap(&mut out, &cursor, cursor_open_for_gap, &part.lo, !part.lo_closed);
        cursor = part.hi.clone();
        cursor_open_for_gap = !part.hi_closed;
    }
    push_gap(&mut out, &cursor, cursor_open_for_gap, &one(), true);
    out
}

fn push_gap(out: &mut Vec<Interval>, lo: &Rational, lo_closed: bool, hi: &Rational, hi_closed: bool) {
    let nonempty = match lo.cmp(hi) {
        Ordering::Less => true,
        Ordering::Equal => lo_closed && hi_closed,
        Ordering::Greater => false,
    };
    if nonempty {
        out.push(Interval {
            lo: lo.clone(),
            hi: hi.clone(),
            lo_closed,
            hi_closed,
        });
    }
}

pub fn contains(k: &KSet, v: &Rational) -> Result<bool, KSetError> {
    k.contains(v)
}

pub fn parse_kset(text: &str) -> Result<KSet, KSetError> {
    let mut cur = Cursor { text, pos: 0 };
    cur.skip_ws();
    if cur.rest().starts_with("{}") {
        cur.pos += 2;
        cur.skip_ws();
        if !cur.at_end() {
            return Err(cur.error("unexpected input after `{}`"));
        }
        return Ok(KSet::empty());
    }
    let mut parts = vec![cur.item()?];
    loop {
        cur.skip_ws();
        if cur.at_end() {
            break;
        }
        if !cur.eat('u') {
            return Err(cur.error("expected `u` between intervals"));
        }
        parts.push(cur.item()?);
    }
    Ok(KSet::from_intervals(parts))
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl Cursor<'_> {
    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(char::is_whitespace) {
            self.pos += self.rest().chars().next().map_or(1, char::len_utf8);
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn error(&self, message: &str) -> KSetError {
        KSetError::Syntax {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn rational(&mut self) -> Result<Rational, KSetError> {
        self.skip_ws();
        let start = self.pos;
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_digit() || c == '/' || c == '.'))
            .unwrap_or(self.rest().len());
        let lit = &self.text[start..start + len];
        let value = parse_rational(lit).ok_or_else(|| KSetError::Syntax {
            position: start,
            message: format!("expected a rational number, found `{lit}`"),
        })?;
        self.pos += len;
        Ok(value)
    }

    fn item(&mut self) -> Result<Interval, KSetError> {
        self.skip_ws();
        if self.eat('{') {
            let v = self.rational()?;
            if !self.eat('}') {
                return Err(self.error("expected `}`"));
            }
            return Interval::point(v);
        }
        let lo_closed = if self.eat('[') {
            true
        } else if self.eat('(') {
            false
        } else {
            return Err(self.error("expected `[`, `(` or `{`"));
        };
        let lo = self.rational()?;
        if !self.eat(',') {
            return Err(self.error("expected `,`"));
        }
        let hi = self.rational()?;
        let hi_closed = if self.eat(']') {
            true
        } else if self.eat(')') {
            false
        } else {
            return Err(self.error("expected `]` or `)`"));
        };
        Interval::new(lo, hi, lo_closed, hi_closed)
    }
}
