//! Averaging operators: replace a function by its mean on each of finitely
//! many disjoint intervals, identity elsewhere.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::powerlog::PowerLog;
use crate::stepfn::StepFunction;
use crate::weight::{Term, Weight};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AveragingOp {
    intervals: Vec<(f64, f64)>,
}

impl AveragingOp {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Sorts the intervals and checks that they are disjoint with `0 ≤ a < b < ∞`.
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        intervals.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
        for &(a, b) in &intervals {
            if !(a >= 0.0 && b > a && b.is_finite()) {
                return Err(Error::InvalidInput(format!("averaging interval ({a}, {b}) is not a bounded interval in (0, ∞)")));
            }
        }
        if intervals.windows(2).any(|w| w[1].0 < w[0].1) {
            return Err(Error::InvalidInput("averaging intervals overlap".into()));
        }
        Ok(Self { intervals })
    }

    pub fn single(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![(a, b)])
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_identity(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Interval containing `t`, if any.
    pub fn interval_of(&self, t: f64) -> Option<(f64, f64)> {
        let i = self.intervals.partition_point(|iv| iv.1 <= t);
        self.intervals.get(i).copied().filter(|iv| iv.0 < t)
    }

    /// `A f` for a weight-like function; the result has the pieces of `f`
    /// outside the intervals and one constant per interval.
    pub fn apply(&self, f: &Weight) -> Weight {
        if self.is_identity() {
            return f.clone();
        }
        let mut terms: Vec<Term> = Vec::new();
        for t in f.terms() {
            let mut lo = t.lo;
            for &(a, b) in &self.intervals {
                if b <= lo || a >= t.hi {
                    continue;
                }
                if a > lo {
                    terms.push(Term::new(t.f, lo, a));
                }
                lo = b;
            }
            if t.hi > lo {
                terms.push(Term::new(t.f, lo, t.hi));
            }
        }
        for &(a, b) in &self.intervals {
            let mean = f.integral(a, b) / (b - a);
            terms.push(Term::new(PowerLog::constant(mean), a, b));
        }
        terms.sort_by(|x, y| x.lo.partial_cmp(&y.lo).unwrap());
        Weight::from_terms_lossy(terms)
    }

    /// `A f` for a step function (no tail crossing an interval).
    pub fn apply_step(&self, f: &StepFunction) -> Result<StepFunction> {
        if f.tail().is_some() && self.intervals.iter().any(|iv| iv.1 > f.end()) {
            return Err(Error::Unsupported("averaging across a power-log tail".into()));
        }
        let w = self.apply(&f.to_weight().restrict(0.0, f.end()));
        let iv: Vec<(f64, f64, f64)> = w.terms().iter().map(|t| (t.lo, t.hi, t.f.c)).collect();
        let mut g = StepFunction::from_intervals(f.domain(), &iv)?;
        if let Some(t) = f.tail() {
            // pad with a zero cell up to the original end, then reattach the tail
            if g.end() < f.end() {
                let mut b = g.breakpoints().to_vec();
                let mut v = g.values().to_vec();
                b.push(f.end());
                v.push(0.0);
                g = StepFunction::new(b, v, None, f.domain())?;
            }
            g = g.with_tail(*t)?;
        }
        Ok(g)
    }
}

impl fmt::Display for AveragingOp {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.intervals.iter().map(|(a, b)| format!("{a},{b}")).collect();
        write!(out, "{}", parts.join(";"))
    }
}

/// Parses `"a1,b1;a2,b2"`; the empty string is the identity.
impl FromStr for AveragingOp {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "identity" {
            return Ok(Self::identity());
        }
        let mut iv = Vec::new();
        for (k, part) in s.split(';').enumerate() {
            let nums: Vec<&str> = part.split(',').map(str::trim).collect();
            if nums.len() != 2 {
                return Err(Error::Parse { pos: k, msg: format!("interval `{part}` needs the form a,b") });
            }
            let a: f64 = nums[0].parse().map_err(|_| Error::Parse { pos: k, msg: format!("bad number `{}`", nums[0]) })?;
            let b: f64 = nums[1].parse().map_err(|_| Error::Parse { pos: k, msg: format!("bad number `{}`", nums[1]) })?;
            iv.push((a, b));
        }
        Self::new(iv)
    }
}

impl Serialize for AveragingOp {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.intervals.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AveragingOp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let iv = Vec::<(f64, f64)>::deserialize(d)?;
        Self::new(iv).map_err(serde::de::Error::custom)
    }
}
