//! Weights: finite sums of power-log monomials restricted to intervals.
//!
//! A weight is written in a small expression language,
//!
//! ```text
//! weight := term ("+" term)*
//! term   := [NUM ["*"]] "t^" NUM ["*L^" NUM] ["on(" NUM "," (NUM | "inf") ")"]
//! ```
//!
//! where `L` stands for `1 + |log t|`. A term without `on(..)` lives on `(0, ∞)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::powerlog::PowerLog;

/// One term `f(t)·χ_{[lo,hi)}(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub f: PowerLog,
    pub lo: f64,
    pub hi: f64,
}

impl Term {
    pub fn new(f: PowerLog, lo: f64, hi: f64) -> Self {
        Self { f, lo, hi }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo && t < self.hi
    }

    /// `∫ f·g` over `[x0,x1) ∩ [lo,hi)`.
    pub fn integral_times(&self, g: &PowerLog, x0: f64, x1: f64) -> f64 {
        let a = x0.max(self.lo);
        let b = x1.min(self.hi);
        if !(b > a) {
            return 0.0;
        }
        self.f.mul(g).integral(a, b)
    }
}

/// A non-negative function `Σ c·t^a·L^b·χ_{[lo,hi)}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Weight {
    terms: Vec<Term>,
}

impl Weight {
    /// Builds a weight; every term needs `c > 0` and `0 ≤ lo < hi`.
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            if !(t.f.c > 0.0) || !t.f.c.is_finite() {
                return Err(Error::InvalidInput(format!("weight coefficient must be positive, got {}", t.f.c)));
            }
            if !(t.lo >= 0.0 && t.hi > t.lo) || t.lo.is_infinite() {
                return Err(Error::InvalidInput(format!("term support ({}, {}) has no length", t.lo, t.hi)));
            }
            if !t.f.a.is_finite() || !t.f.b.is_finite() {
                return Err(Error::InvalidInput("term exponents must be finite".into()));
            }
        }
        Ok(Self { terms })
    }

    /// Internal constructor that silently drops zero or empty terms.
    pub(crate) fn from_terms_lossy(terms: impl IntoIterator<Item = Term>) -> Self {
        Self {
            terms: terms
                .into_iter()
                .filter(|t| t.f.c > 0.0 && t.hi > t.lo && t.f.c.is_finite())
                .collect(),
        }
    }

    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    /// `c` on `[lo, hi)`.
    pub fn constant_on(c: f64, lo: f64, hi: f64) -> Self {
        Self::from_terms_lossy([Term::new(PowerLog::constant(c), lo, hi)])
    }

    /// `χ_{[lo,hi)}`.
    pub fn indicator(lo: f64, hi: f64) -> Self {
        Self::constant_on(1.0, lo, hi)
    }

    /// `c·t^a` on `(0, ∞)`.
    pub fn power(c: f64, a: f64) -> Self {
        Self::from_terms_lossy([Term::new(PowerLog::power(c, a), 0.0, f64::INFINITY)])
    }

    /// `ω_z(t) = min(z^{-2}, t^{-2})`.
    pub fn omega(z: f64) -> Self {
        Self::from_terms_lossy([
            Term::new(PowerLog::constant(z.powi(-2)), 0.0, z),
            Term::new(PowerLog::power(1.0, -2.0), z, f64::INFINITY),
        ])
    }

    pub fn parse(expr: &str) -> Result<Self> {
        Parser::new(expr).weight()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms.iter().filter(|x| x.contains(t)).map(|x| x.f.eval(t)).sum()
    }

    /// `∫_{x0}^{x1} w`.
    pub fn integral(&self, x0: f64, x1: f64) -> f64 {
        self.integral_times(&PowerLog::constant(1.0), x0, x1)
    }

    /// `∫_{x0}^{x1} w(t)·g(t) dt` for a monomial `g`.
    pub fn integral_times(&self, g: &PowerLog, x0: f64, x1: f64) -> f64 {
        self.terms.iter().map(|t| t.integral_times(g, x0, x1)).sum()
    }

    /// `∫_{x0}^{x1} w(t)·t^e dt`.
    pub fn moment(&self, e: f64, x0: f64, x1: f64) -> f64 {
        self.integral_times(&PowerLog::power(1.0, e), x0, x1)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_terms_lossy(self.terms.iter().map(|t| Term::new(t.f.scale(s), t.lo, t.hi)))
    }

    pub fn add(&self, other: &Weight) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self { terms }
    }

    /// Restriction to `[x0, x1)`.
    pub fn restrict(&self, x0: f64, x1: f64) -> Self {
        Self::from_terms_lossy(
            self.terms
                .iter()
                .map(|t| Term::new(t.f, t.lo.max(x0), t.hi.min(x1))),
        )
    }

    /// Sorted, de-duplicated support endpoints (finite ones only).
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self
            .terms
            .iter()
            .flat_map(|t| [t.lo, t.hi])
            .filter(|x| x.is_finite() && *x > 0.0)
            .collect();
        b.sort_by(|a, c| a.partial_cmp(c).unwrap());
        b.dedup();
        b
    }

    /// Whether the term supports are pairwise disjoint.
    pub fn is_disjoint(&self) -> bool {
        let mut s: Vec<(f64, f64)> = self.terms.iter().map(|t| (t.lo, t.hi)).collect();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s.windows(2).all(|w| w[0].1 <= w[1].0)
    }

    /// Terms sorted by support, asserting disjointness.
    pub fn pieces(&self) -> Result<Vec<Term>> {
        if !self.is_disjoint() {
            return Err(Error::Unsupported("operation needs a weight with non-overlapping terms".into()));
        }
        let mut p = self.terms.clone();
        p.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
        Ok(p)
    }

    /// Splits overlapping terms so that the result has disjoint supports, each
    /// carrying a list of monomials (their sum is the weight on that piece).
    pub fn partition(&self) -> Vec<(f64, f64, Vec<PowerLog>)> {
        let mut cuts: Vec<f64> = self.terms.iter().flat_map(|t| [t.lo, t.hi]).collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut out = Vec::new();
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let fs: Vec<PowerLog> = self
                .terms
                .iter()
                .filter(|t| t.lo <= a && t.hi >= b)
                .map(|t| t.f)
                .collect();
            if !fs.is_empty() {
                out.push((a, b, fs));
            }
        }
        out
    }

    /// `w^r` for a weight with disjoint terms.
    pub fn powf(&self, r: f64) -> Result<Self> {
        let p = self.pieces()?;
        Ok(Self::from_terms_lossy(p.into_iter().map(|t| Term::new(t.f.powf(r), t.lo, t.hi))))
    }

    /// `∫ h^r·w` where `self = h` has disjoint terms.
    pub fn power_integral_against(&self, r: f64, w: &Weight) -> Result<f64> {
        let pieces = self.pieces()?;
        let mut total = 0.0;
        for p in &pieces {
            let g = p.f.powf(r);
            for t in &w.terms {
                total += t.integral_times(&g, p.lo, p.hi);
                if total == f64::INFINITY {
                    return Ok(total);
                }
            }
        }
        Ok(total)
    }

    /// `‖h‖_{r,w} = (∫ h^r w)^{1/r}`.
    pub fn lebesgue_norm(&self, r: f64, w: &Weight) -> Result<f64> {
        Ok(self.power_integral_against(r, w)?.powf(1.0 / r))
    }

    /// Limit of `w(t)` as `t → ∞` (only terms with unbounded support count).
    pub fn limit_at_infinity(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.hi == f64::INFINITY)
            .map(|t| t.f.limit_at_infinity())
            .sum()
    }

    /// `t^{p-2} w(1/t)`, term by term.
    pub fn dual(&self, p: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| {
                    let lo = if t.hi == f64::INFINITY { 0.0 } else { 1.0 / t.hi };
                    let hi = if t.lo == 0.0 { f64::INFINITY } else { 1.0 / t.lo };
                    Term::new(PowerLog::new(t.f.c, p - 2.0 - t.f.a, t.f.b), lo, hi)
                })
                .collect(),
        }
    }

    /// Whether the weight is non-increasing on `(0, ∞)`.
    pub fn is_nonincreasing(&self) -> bool {
        let parts = self.partition();
        if parts.is_empty() {
            return true;
        }
        if parts[0].0 > 0.0 {
            return false;
        }
        let mut prev_end_val = f64::INFINITY;
        let mut prev_hi = 0.0;
        for (a, b, fs) in &parts {
            if *a > prev_hi {
                // a gap of zeros followed by positive values
                return false;
            }
            if fs.len() > 1 && !all_decreasing(fs, *a, *b) {
                return false;
            }
            if fs.len() == 1 && !fs[0].is_nonincreasing_on(*a, *b) {
                return false;
            }
            let start: f64 = fs.iter().map(|f| eval_right(f, *a)).sum();
            if start > prev_end_val * (1.0 + 1e-12) {
                return false;
            }
            prev_end_val = fs.iter().map(|f| f.eval(*b)).sum();
            prev_hi = *b;
        }
        true
    }
}

fn all_decreasing(fs: &[PowerLog], a: f64, b: f64) -> bool {
    fs.iter().all(|f| f.is_nonincreasing_on(a, b))
}

fn eval_right(f: &PowerLog, a: f64) -> f64 {
    if a == 0.0 {
        f.limit_at_zero()
    } else {
        f.eval(a)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(out, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(out, " + ")?;
            }
            write!(out, "{}*t^{}", t.f.c, t.f.a)?;
            if t.f.b != 0.0 {
                write!(out, "*L^{}", t.f.b)?;
            }
            if t.lo != 0.0 || t.hi != f64::INFINITY {
                if t.hi == f64::INFINITY {
                    write!(out, " on({},inf)", t.lo)?;
                } else {
                    write!(out, " on({},{})", t.lo, t.hi)?;
                }
            }
        }
        Ok(())
    }
}

impl FromStr for Weight {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Weight::parse(s)
    }
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s.trim() == "0" {
            return Ok(Weight::zero());
        }
        Weight::parse(&s).map_err(serde::de::Error::custom)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, pos: 0 }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, lit: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(lit) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, lit: &str) -> Result<()> {
        if self.eat(lit) {
            Ok(())
        } else {
            self.err(format!("expected `{lit}`"))
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let bytes = rest.as_bytes();
        let mut i = 0;
        if i < bytes.len() && (bytes[i] == b'-' || bytes[i] == b'+') {
            i += 1;
        }
        let digits_start = i;
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
            i += 1;
        }
        if i == digits_start {
            return self.err("expected a number");
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'-' || bytes[j] == b'+') {
                j += 1;
            }
            let exp_start = j;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if j > exp_start {
                i = j;
            }
        }
        match rest[..i].parse::<f64>() {
            Ok(v) => {
                self.pos += i;
                Ok(v)
            }
            Err(_) => self.err(format!("malformed number `{}`", &rest[..i])),
        }
    }

    fn weight(&mut self) -> Result<Weight> {
        let mut terms = vec![self.term()?];
        while self.eat("+") {
            terms.push(self.term()?);
        }
        if self.peek().is_some() {
            return self.err("unexpected trailing input");
        }
        Ok(Weight { terms })
    }

    fn term(&mut self) -> Result<Term> {
        let start = {
            self.skip_ws();
            self.pos
        };
        let c = if self.peek() == Some('t') {
            1.0
        } else {
            let c = self.number()?;
            self.eat("*");
            c
        };
        if !(c > 0.0) {
            self.pos = start;
            return self.err(format!("coefficient must be positive, got {c}"));
        }
        self.expect("t^")?;
        let a = self.number()?;
        let b = if self.eat("*") {
            self.expect("L^")?;
            self.number()?
        } else {
            0.0
        };
        let (lo, hi) = if self.eat("on(") {
            let lo = self.number()?;
            self.expect(",")?;
            let hi = if self.eat("inf") { f64::INFINITY } else { self.number()? };
            self.expect(")")?;
            if !(lo >= 0.0 && hi > lo) {
                return self.err(format!("support ({lo}, {hi}) has no length"));
            }
            (lo, hi)
        } else {
            (0.0, f64::INFINITY)
        };
        Ok(Term::new(PowerLog::new(c, a, b), lo, hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_indicator() {
        let w = Weight::parse("1*t^0 on(0,1)").unwrap();
        assert_eq!(w.terms(), &[Term::new(PowerLog::constant(1.0), 0.0, 1.0)]);
        assert_eq!(w.eval(0.5), 1.0);
        assert_eq!(w.eval(1.5), 0.0);
    }

    #[test]
    fn parse_log_term() {
        let w = Weight::parse("t^-0.5*L^2").unwrap();
        let t = w.terms()[0];
        assert_eq!((t.f.c, t.f.a, t.f.b, t.lo, t.hi), (1.0, -0.5, 2.0, 0.0, f64::INFINITY));
    }

    #[test]
    fn parse_two_terms() {
        let w = Weight::parse("t^0 on(0,1) + t^-1 on(1,inf)").unwrap();
        assert_eq!(w.terms().len(), 2);
        assert_eq!(w.terms()[1].hi, f64::INFINITY);
        assert_eq!(w.eval(4.0), 0.25);
    }

    #[test]
    fn parse_errors_carry_position() {
        match Weight::parse("t^0 + -2*t^1") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 6),
            other => panic!("{other:?}"),
        }
        match Weight::parse("t^0 on(0,1") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 10),
            other => panic!("{other:?}"),
        }
        assert!(Weight::parse("0*t^1").is_err());
        assert!(Weight::parse("x^2").is_err());
    }

    #[test]
    fn display_round_trip() {
        for s in ["2*t^-0.5*L^2 on(0,1)", "1*t^0 on(0,1) + 1*t^-1 on(1,inf)", "0.25*t^1.5"] {
            let w = Weight::parse(s).unwrap();
            assert_eq!(w.to_string(), s);
            assert_eq!(Weight::parse(&w.to_string()).unwrap(), w);
        }
    }

    #[test]
    fn dual_is_involution() {
        let w = Weight::parse("t^0 on(0,1) + 3*t^-1.5*L^1 on(2,inf)").unwrap();
        let p = 1.3;
        assert_eq!(w.dual(p).dual(p), w);
        let v = Weight::parse("t^0 on(0,1)").unwrap().dual(1.0);
        assert_eq!(v.terms()[0], Term::new(PowerLog::power(1.0, -1.0), 1.0, f64::INFINITY));
    }

    #[test]
    fn omega_integral() {
        let w = Weight::omega(1.0);
        assert!((w.integral(0.0, f64::INFINITY) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn monotonicity() {
        assert!(Weight::parse("t^0 on(0,1)").unwrap().is_nonincreasing());
        assert!(!Weight::parse("t^0 on(1,2)").unwrap().is_nonincreasing());
        assert!(Weight::omega(3.0).is_nonincreasing());
        assert!(Weight::parse("t^-0.5").unwrap().is_nonincreasing());
        assert!(!Weight::parse("t^0.5 on(0,1)").unwrap().is_nonincreasing());
    }
}
