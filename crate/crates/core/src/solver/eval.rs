//! Evaluation of L0 terms: exact over the rationals, approximately in `f64`
//! as a cheap filter, and over closed rational intervals.

use num_traits::{Signed, Zero};

use crate::ratio::{one, to_f64, zero, Rational};
use crate::term::{BinOp, CmpOp, Comparison, EndpointSide, Symbol, Term};

/// Values of the complement endpoints `c_i-`, `c_i+`, indexed from 1.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Endpoints(pub Vec<(Rational, Rational)>);

impl Endpoints {
    pub fn get(&self, side: EndpointSide, i: usize) -> Option<&Rational> {
        let (lo, hi) = self.0.get(i.checked_sub(1)?)?;
        Some(match side {
            EndpointSide::Minus => lo,
            EndpointSide::Plus => hi,
        })
    }
}

/// Exact value of an L0 term; `None` if a symbol is unassigned or the term
/// still contains an interpreted symbol.
pub fn eval_exact<'a, F>(t: &Term, ends: &Endpoints, lookup: &F) -> Option<Rational>
where
    F: Fn(&Symbol) -> Option<&'a Rational>,
{
    Some(match t {
        Term::Var(v) => lookup(&Symbol::Var(v.clone()))?.clone(),
        Term::Param(p) => lookup(&Symbol::Param(p.clone()))?.clone(),
        Term::Const(q) => q.clone(),
        Term::Endpoint(side, i) => ends.get(*side, *i)?.clone(),
        Term::Bin(op, l, r) => {
            let a = eval_exact(l, ends, lookup)?;
            let b = eval_exact(r, ends, lookup)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b.is_zero() {
                        zero()
                    } else {
                        a / b
                    }
                }
                BinOp::Min => a.min(b),
                BinOp::Max => a.max(b),
                BinOp::TNorm | BinOp::Resid => return None,
            }
        }
        Term::Delta(_) => return None,
    })
}

pub fn compare(op: CmpOp, l: &Rational, r: &Rational) -> bool {
    match op {
        CmpOp::Le => l <= r,
        CmpOp::Lt => l < r,
        CmpOp::Eq => l == r,
    }
}

pub fn holds_exact<'a, F>(c: &Comparison, ends: &Endpoints, lookup: &F) -> Option<bool>
where
    F: Fn(&Symbol) -> Option<&'a Rational>,
{
    let l = eval_exact(&c.lhs, ends, lookup)?;
    let r = eval_exact(&c.rhs, ends, lookup)?;
    Some(compare(c.op, &l, &r))
}

/// Floating-point value, or `None` when a divisor is too close to zero for
/// the result to be trusted.
pub fn eval_f64<F>(t: &Term, ends: &[(f64, f64)], lookup: &F) -> Option<f64>
where
    F: Fn(&Symbol) -> f64,
{
    Some(match t {
        Term::Var(v) => lookup(&Symbol::Var(v.clone())),
        Term::Param(p) => lookup(&Symbol::Param(p.clone())),
        Term::Const(q) => to_f64(q),
        Term::Endpoint(side, i) => {
            let (lo, hi) = ends.get(i.checked_sub(1)?)?;
            match side {
                EndpointSide::Minus => *lo,
                EndpointSide::Plus => *hi,
            }
        }
        Term::Bin(op, l, r) => {
            let a = eval_f64(l, ends, lookup)?;
            let b = eval_f64(r, ends, lookup)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b.abs() < 1e-9 {
                        return None;
                    }
                    a / b
                }
                BinOp::Min => a.min(b),
                BinOp::Max => a.max(b),
                BinOp::TNorm | BinOp::Resid => return None,
            }
        }
        Term::Delta(_) => return None,
    })
}

/// Three-valued outcome of a floating-point comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fuzzy {
    True,
    False,
    Unsure,
}

pub fn holds_f64(op: CmpOp, l: f64, r: f64) -> Fuzzy {
    const MARGIN: f64 = 1e-9;
    let scale = 1.0 + l.abs().max(r.abs());
    let d = l - r;
    if !d.is_finite() {
        return Fuzzy::Unsure;
    }
    if d.abs() <= MARGIN * scale {
        return Fuzzy::Unsure;
    }
    let truth = match op {
        CmpOp::Le | CmpOp::Lt => d < 0.0,
        CmpOp::Eq => false,
    };
    if truth {
        Fuzzy::True
    } else {
        Fuzzy::False
    }
}

/// A closed rational interval; `None` bounds are infinite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Span {
    pub lo: Option<Rational>,
    pub hi: Option<Rational>,
}

impl Span {
    pub fn point(q: Rational) -> Span {
        Span {
            lo: Some(q.clone()),
            hi: Some(q),
        }
    }

    pub fn new(lo: Rational, hi: Rational) -> Span {
        Span { lo: Some(lo), hi: Some(hi) }
    }

    pub fn top() -> Span {
        Span { lo: None, hi: None }
    }

    pub fn contains_zero(&self) -> bool {
        self.lo.as_ref().is_none_or(|l| !l.is_positive()) && self.hi.as_ref().is_none_or(|h| !h.is_negative())
    }

    pub fn is_point_zero(&self) -> bool {
        matches!((&self.lo, &self.hi), (Some(l), Some(h)) if l.is_zero() && h.is_zero())
    }

    fn bounded(&self) -> Option<(&Rational, &Rational)> {
        Some((self.lo.as_ref()?, self.hi.as_ref()?))
    }
}

fn add_opt(a: &Option<Rational>, b: &Option<Rational>) -> Option<Rational> {
    Some(a.as_ref()? + b.as_ref()?)
}

fn sub_opt(a: &Option<Rational>, b: &Option<Rational>) -> Option<Rational> {
    Some(a.as_ref()? - b.as_ref()?)
}

fn min_opt(a: &Option<Rational>, b: &Option<Rational>) -> Option<Rational> {
    // None as an upper end means +inf, as a lower end -inf; callers pick
    // the right combinator for the end they compute.
    Some(a.as_ref()?.min(b.as_ref()?).clone())
}

pub fn span_add(a: &Span, b: &Span) -> Span {
    Span {
        lo: add_opt(&a.lo, &b.lo),
        hi: add_opt(&a.hi, &b.hi),
    }
}

pub fn span_sub(a: &Span, b: &Span) -> Span {
    Span {
        lo: sub_opt(&a.lo, &b.hi),
        hi: sub_opt(&a.hi, &b.lo),
    }
}

pub fn span_mul(a: &Span, b: &Span) -> Span {
    let (Some((al, ah)), Some((bl, bh))) = (a.bounded(), b.bounded()) else {
        return Span::top();
    };
    let corners = [al * bl, al * bh, ah * bl, ah * bh];
    let lo = corners.iter().min().cloned();
    let hi = corners.iter().max().cloned();
    Span { lo, hi }
}

/// Division with the `u ÷ 0 = 0` convention.
pub fn span_div(a: &Span, b: &Span) -> Span {
    if b.is_point_zero() {
        return Span::point(zero());
    }
    if b.contains_zero() {
        return Span::top();
    }
    let (Some((al, ah)), Some((bl, bh))) = (a.bounded(), b.bounded()) else {
        return Span::top();
    };
    let corners = [al / bl, al / bh, ah / bl, ah / bh];
    Span {
        lo: corners.iter().min().cloned(),
        hi: corners.iter().max().cloned(),
    }
}

pub fn span_min(a: &Span, b: &Span) -> Span {
    Span {
        lo: min_opt(&a.lo, &b.lo),
        hi: match (&a.hi, &b.hi) {
            (Some(x), Some(y)) => Some(x.min(y).clone()),
            (Some(x), None) | (None, Some(x)) => Some(x.clone()),
            (None, None) => None,
        },
    }
}

pub fn span_max(a: &Span, b: &Span) -> Span {
    Span {
        lo: match (&a.lo, &b.lo) {
            (Some(x), Some(y)) => Some(x.max(y).clone()),
            (Some(x), None) | (None, Some(x)) => Some(x.clone()),
            (None, None) => None,
        },
        hi: match (&a.hi, &b.hi) {
            (Some(x), Some(y)) => Some(x.max(y).clone()),
            _ => None,
        },
    }
}

/// Interval extension of a term, given an interval per symbol. Interpreted
/// terms get the bounds valid under every continuous t-norm.
pub fn eval_span<F>(t: &Term, ends: &Endpoints, lookup: &F) -> Span
where
    F: Fn(&Symbol) -> Span,
{
    match t {
        Term::Var(v) => lookup(&Symbol::Var(v.clone())),
        Term::Param(p) => lookup(&Symbol::Param(p.clone())),
        Term::Const(q) => Span::point(q.clone()),
        Term::Endpoint(side, i) => ends.get(*side, *i).map_or_else(Span::top, |q| Span::point(q.clone())),
        Term::Bin(op, l, r) => {
            let a = eval_span(l, ends, lookup);
            let b = eval_span(r, ends, lookup);
            match op {
                BinOp::Add => span_add(&a, &b),
                BinOp::Sub => span_sub(&a, &b),
                BinOp::Mul => span_mul(&a, &b),
                BinOp::Div => span_div(&a, &b),
                BinOp::Min => span_min(&a, &b),
                BinOp::Max => span_max(&a, &b),
                BinOp::TNorm => tnorm_span(&a, &b),
                BinOp::Resid => resid_span(&a, &b),
            }
        }
        Term::Delta(x) => delta_span(&eval_span(x, ends, lookup)),
    }
}

fn unit_hi(s: &Span) -> Rational {
    s.hi.as_ref().map_or_else(one, |h| h.clone().min(one()))
}

// Bounds shared by every continuous t-norm, for arguments in [0,1]:
// x * y <= min{x, y}, y <= (x => y) with 1 when x <= y, and D is crisp.
fn tnorm_span(a: &Span, b: &Span) -> Span {
    let hi = unit_hi(a).min(unit_hi(b)).max(zero());
    Span::new(zero(), hi)
}

fn resid_span(a: &Span, b: &Span) -> Span {
    if matches!((&a.hi, &b.lo), (Some(x), Some(y)) if x <= y) {
        return Span::point(one());
    }
    let lo = b.lo.as_ref().map_or_else(zero, |l| l.clone().max(zero()).min(one()));
    Span::new(lo, one())
}

fn delta_span(a: &Span) -> Span {
    if a.lo.as_ref().is_some_and(|l| *l >= one()) {
        Span::point(one())
    } else if a.hi.as_ref().is_some_and(|h| *h < one()) {
        Span::point(zero())
    } else {
        Span::new(zero(), one())
    }
}

/// Whether `l op r` is certainly false for every choice of values from the
/// two spans.
pub fn certainly_false(op: CmpOp, l: &Span, r: &Span) -> bool {
    match op {
        CmpOp::Le => matches!((&l.lo, &r.hi), (Some(a), Some(b)) if a > b),
        CmpOp::Lt => matches!((&l.lo, &r.hi), (Some(a), Some(b)) if a >= b),
        CmpOp::Eq => {
            matches!((&l.lo, &r.hi), (Some(a), Some(b)) if a > b)
                || matches!((&r.lo, &l.hi), (Some(a), Some(b)) if a > b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::rat;
    use std::collections::BTreeMap;

    fn env(pairs: &[(&str, Rational)]) -> BTreeMap<Symbol, Rational> {
        pairs.iter().map(|(n, v)| (Symbol::Var(n.to_string()), v.clone())).collect()
    }

    #[test]
    fn division_by_zero_is_zero() {
        let e = env(&[("x", rat(1, 2)), ("y", zero())]);
        let t = Term::div(Term::var("x"), Term::var("y"));
        assert_eq!(eval_exact(&t, &Endpoints::default(), &|s| e.get(s)), Some(zero()));
        let t = Term::div(Term::var("y"), Term::var("x"));
        assert_eq!(eval_exact(&t, &Endpoints::default(), &|s| e.get(s)), Some(zero()));
        let s = span_div(&Span::new(one(), one()), &Span::point(zero()));
        assert_eq!(s, Span::point(zero()));
        let s = span_div(&Span::new(one(), one()), &Span::new(zero(), one()));
        assert_eq!(s, Span::top());
    }

    #[test]
    fn endpoints_resolve_by_one_based_index() {
        let ends = Endpoints(vec![(zero(), rat(1, 2)), (rat(3, 4), one())]);
        let t = Term::Endpoint(EndpointSide::Plus, 1);
        assert_eq!(eval_exact(&t, &ends, &|_| None), Some(rat(1, 2)));
        let t = Term::Endpoint(EndpointSide::Minus, 2);
        assert_eq!(eval_exact(&t, &ends, &|_| None), Some(rat(3, 4)));
        assert_eq!(eval_exact(&Term::Endpoint(EndpointSide::Minus, 3), &ends, &|_| None), None);
    }

    #[test]
    fn interpreted_terms_have_no_exact_value() {
        let t = Term::tnorm(Term::one(), Term::one());
        assert_eq!(eval_exact(&t, &Endpoints::default(), &|_| None), None);
    }

    #[test]
    fn interpreted_spans_hold_for_every_tnorm() {
        let x = Term::var("x");
        let y = Term::var("y");
        let at = |lo: Rational, hi: Rational| move |_: &Symbol| Span::new(lo.clone(), hi.clone());
        let ends = Endpoints::default();
        let low = at(zero(), rat(1, 4));
        assert_eq!(eval_span(&Term::tnorm(x.clone(), y.clone()), &ends, &low), Span::new(zero(), rat(1, 4)));
        assert_eq!(eval_span(&Term::delta(x.clone()), &ends, &low), Span::point(zero()));
        let r = eval_span(&Term::resid(Term::one(), x.clone()), &ends, &low);
        assert_eq!(r, Span::new(zero(), one()));
        let r = eval_span(&Term::resid(x.clone(), Term::one()), &ends, &low);
        assert_eq!(r, Span::point(one()));
        let r = eval_span(&Term::resid(Term::zero(), x), &ends, &at(rat(1, 2), one()));
        assert_eq!(r, Span::point(one()));
        assert_eq!(eval_span(&Term::delta(Term::one()), &ends, &low), Span::point(one()));
    }

    #[test]
    fn span_arithmetic() {
        let a = Span::new(zero(), one());
        let b = Span::new(rat(1, 2), one());
        assert_eq!(span_sub(&a, &b), Span::new(rat(-1, 1), rat(1, 2)));
        assert_eq!(span_mul(&Span::new(rat(-1, 1), one()), &b), Span::new(rat(-1, 1), one()));
        assert_eq!(span_min(&a, &b), Span::new(zero(), one()));
        assert_eq!(span_max(&a, &b), Span::new(rat(1, 2), one()));
        assert!(certainly_false(CmpOp::Lt, &Span::point(one()), &Span::new(zero(), one())));
        assert!(!certainly_false(CmpOp::Le, &Span::point(one()), &Span::new(zero(), one())));
        assert!(certainly_false(CmpOp::Eq, &Span::point(one()), &Span::new(zero(), rat(1, 2))));
    }

    #[test]
    fn f64_filter_flags_near_ties() {
        assert_eq!(holds_f64(CmpOp::Le, 0.5, 0.5), Fuzzy::Unsure);
        assert_eq!(holds_f64(CmpOp::Lt, 0.25, 0.5), Fuzzy::True);
        assert_eq!(holds_f64(CmpOp::Le, 0.75, 0.5), Fuzzy::False);
        assert_eq!(holds_f64(CmpOp::Eq, 0.75, 0.5), Fuzzy::False);
    }
}
