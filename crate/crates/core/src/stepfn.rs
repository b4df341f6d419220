//! Piecewise-constant functions, their distribution functions and decreasing rearrangements.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::powerlog::PowerLog;
use crate::weight::{Term, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    #[default]
    Halfline,
    Unit,
}

/// A non-negative step function. Cell `i` is `[breakpoints[i-1], breakpoints[i])`
/// with the first cell starting at 0; an optional power-log tail continues
/// beyond the last breakpoint, otherwise the function vanishes there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStep")]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    #[serde(default)]
    tail: Option<PowerLog>,
    #[serde(default)]
    domain: Domain,
}

#[derive(Deserialize)]
struct RawStep {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    #[serde(default)]
    tail: Option<PowerLog>,
    #[serde(default)]
    domain: Domain,
}

impl TryFrom<RawStep> for StepFunction {
    type Error = Error;
    fn try_from(r: RawStep) -> Result<Self> {
        StepFunction::new(r.breakpoints, r.values, r.tail, r.domain)
    }
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, tail: Option<PowerLog>, domain: Domain) -> Result<Self> {
        if breakpoints.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "{} breakpoints but {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        let mut prev = 0.0;
        for &b in &breakpoints {
            if !(b > prev) || !b.is_finite() {
                return Err(Error::InvalidInput("breakpoints must be finite, positive and strictly increasing".into()));
            }
            prev = b;
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput("values must be finite and non-negative".into()));
        }
        if let Some(t) = &tail {
            if !(t.c >= 0.0 && t.c.is_finite() && t.a.is_finite() && t.b.is_finite()) {
                return Err(Error::InvalidInput("tail must have a finite non-negative coefficient".into()));
            }
        }
        if domain == Domain::Unit {
            if prev > 1.0 {
                return Err(Error::InvalidInput("unit-interval function has a breakpoint beyond 1".into()));
            }
            if tail.is_some() {
                return Err(Error::InvalidInput("unit-interval function cannot carry a tail".into()));
            }
        }
        let tail = tail.filter(|t| t.c > 0.0);
        Ok(Self { breakpoints, values, tail, domain })
    }

    pub fn zero(domain: Domain) -> Self {
        Self { breakpoints: Vec::new(), values: Vec::new(), tail: None, domain }
    }

    /// `χ_{[a,b)}` on the half-line.
    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        Self::from_intervals(Domain::Halfline, &[(a, b, 1.0)])
    }

    /// Builds a step function from disjoint intervals `(a, b, value)`.
    pub fn from_intervals(domain: Domain, intervals: &[(f64, f64, f64)]) -> Result<Self> {
        let mut iv: Vec<(f64, f64, f64)> = intervals.iter().copied().filter(|x| x.1 > x.0).collect();
        iv.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let mut bps = Vec::new();
        let mut vals = Vec::new();
        let mut cur = 0.0;
        for (a, b, v) in iv {
            if a < 0.0 || a < cur {
                return Err(Error::InvalidInput("intervals must be disjoint and inside (0, ∞)".into()));
            }
            if a > cur {
                bps.push(a);
                vals.push(0.0);
            }
            bps.push(b);
            vals.push(v);
            cur = b;
        }
        Self::new(bps, vals, None, domain)
    }

    /// Consecutive cells of the given lengths, starting at 0.
    pub fn from_cells(lengths: &[f64], values: &[f64]) -> Result<Self> {
        let mut acc = 0.0;
        let bps = lengths
            .iter()
            .map(|l| {
                acc += l;
                acc
            })
            .collect();
        Self::new(bps, values.to_vec(), None, Domain::Halfline)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail(&self) -> Option<&PowerLog> {
        self.tail.as_ref()
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Right end of the last cell (0 for the empty function).
    pub fn end(&self) -> f64 {
        self.breakpoints.last().copied().unwrap_or(0.0)
    }

    pub fn with_tail(mut self, tail: PowerLog) -> Result<Self> {
        if self.domain == Domain::Unit {
            return Err(Error::InvalidInput("unit-interval function cannot carry a tail".into()));
        }
        self.tail = Some(tail).filter(|t| t.c > 0.0);
        Ok(self)
    }

    /// Iterator over `(lo, hi, value)` cells.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints.iter().enumerate().map(move |(i, &hi)| {
            let lo = if i == 0 { 0.0 } else { self.breakpoints[i - 1] };
            (lo, hi, self.values[i])
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        let i = self.breakpoints.partition_point(|&b| b <= t);
        if i < self.values.len() {
            self.values[i]
        } else {
            self.tail.map_or(0.0, |f| f.eval(t))
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out.tail = out.tail.map(|t| t.scale(s)).filter(|t| t.c > 0.0);
        if s == 0.0 {
            out.tail = None;
        }
        out
    }

    /// The same function as a [`Weight`] with disjoint terms.
    pub fn to_weight(&self) -> Weight {
        let mut terms: Vec<Term> = self
            .cells()
            .map(|(lo, hi, v)| Term::new(PowerLog::constant(v), lo, hi))
            .collect();
        if let Some(t) = self.tail {
            terms.push(Term::new(t, self.end(), f64::INFINITY));
        }
        Weight::from_terms_lossy(terms)
    }

    /// `∫_0^x f`.
    pub fn integral_to(&self, x: f64) -> f64 {
        let mut s = 0.0;
        for (lo, hi, v) in self.cells() {
            if lo >= x {
                return s;
            }
            s += v * (hi.min(x) - lo);
        }
        if let Some(t) = self.tail {
            if x > self.end() {
                s += t.integral(self.end(), x);
            }
        }
        s
    }

    pub fn l1_norm(&self) -> f64 {
        self.integral_to(f64::INFINITY)
    }

    /// `∫ f^p w`, exact per cell and weight term; `+∞` when divergent.
    pub fn weighted_integral(&self, w: &Weight, p: f64) -> Result<f64> {
        if !(p > 0.0) {
            return Err(Error::InvalidInput(format!("exponent must be positive, got {p}")));
        }
        self.to_weight().power_integral_against(p, w)
    }

    /// `μ{|f| > λ}`.
    pub fn distribution(&self, lambda: f64) -> Result<f64> {
        if !(lambda >= 0.0) {
            return Err(Error::InvalidInput(format!("level must be non-negative, got {lambda}")));
        }
        let mut m: f64 = self.cells().filter(|c| c.2 > lambda).map(|c| c.1 - c.0).sum();
        if let Some(t) = self.tail {
            m += t.superlevel_measure(lambda, self.end(), f64::INFINITY);
        }
        if m == f64::INFINITY && lambda > 0.0 {
            return Err(Error::NonRearrangeable { level: lambda });
        }
        Ok(m)
    }

    pub fn is_nonincreasing(&self) -> bool {
        if self.values.windows(2).any(|w| w[1] > w[0]) {
            return false;
        }
        match self.tail {
            None => true,
            Some(t) => {
                t.is_nonincreasing_on(self.end(), f64::INFINITY)
                    && self.values.last().map_or(true, |&v| t.eval(self.end()) <= v * (1.0 + 1e-12))
            }
        }
    }

    /// The decreasing rearrangement `f*`.
    pub fn rearrange(&self) -> Result<DecreasingStep> {
        if let Some(t) = self.tail {
            let lim = t.limit_at_infinity();
            if lim > 0.0 {
                return Err(Error::NonRearrangeable { level: lim.min(f64::MAX) });
            }
            if !t.is_nonincreasing_on(self.end(), f64::INFINITY) {
                return Err(Error::Unsupported("rearranging a non-monotone tail".into()));
            }
            if self.values.iter().any(|&v| v == 0.0) {
                return Err(Error::Unsupported("rearranging a tail after a zero cell".into()));
            }
            let start = t.eval(self.end());
            if self.values.iter().any(|&v| v < start) {
                return Err(Error::Unsupported("rearranging a tail that exceeds a cell value".into()));
            }
        }
        let mut cells: Vec<(f64, f64)> = self
            .cells()
            .filter(|c| c.2 > 0.0)
            .map(|(lo, hi, v)| (v, hi - lo))
            .collect();
        // stable: equal values keep their original order
        cells.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let mut bps: Vec<f64> = Vec::with_capacity(cells.len());
        let mut vals: Vec<f64> = Vec::with_capacity(cells.len());
        let mut acc = 0.0;
        for (v, len) in cells {
            acc += len;
            if vals.last() == Some(&v) {
                *bps.last_mut().unwrap() = acc;
            } else {
                bps.push(acc);
                vals.push(v);
            }
        }
        // keep the tail anchored at the original end when present
        if self.tail.is_some() {
            if let Some(last) = bps.last_mut() {
                *last = self.end();
            }
        }
        Ok(DecreasingStep(StepFunction { breakpoints: bps, values: vals, tail: self.tail, domain: self.domain }))
    }

    /// Cumulative integral at `0` and every breakpoint.
    pub fn cumulative_nodes(&self) -> Vec<(f64, f64)> {
        let mut out = vec![(0.0, 0.0)];
        let mut s = 0.0;
        for (lo, hi, v) in self.cells() {
            s += v * (hi - lo);
            out.push((hi, s));
        }
        out
    }
}

/// A non-increasing step function, e.g. a rearrangement `f*`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DecreasingStep(StepFunction);

impl<'de> Deserialize<'de> for DecreasingStep {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = StepFunction::deserialize(d)?;
        DecreasingStep::new(f).map_err(serde::de::Error::custom)
    }
}

impl DecreasingStep {
    /// Certifies that `f` is non-increasing with a decaying tail.
    pub fn new(f: StepFunction) -> Result<Self> {
        if !f.is_nonincreasing() {
            return Err(Error::InvalidInput("function is not non-increasing".into()));
        }
        if let Some(t) = f.tail {
            if t.a > 0.0 || t.limit_at_infinity() > 0.0 {
                return Err(Error::InvalidInput("tail of a decreasing function must decay".into()));
            }
        }
        Ok(Self(f))
    }

    /// Rearrangement of a finite sequence of magnitudes (counting measure),
    /// constant on `[n, n+1)`.
    pub fn from_sequence(magnitudes: &[f64]) -> Result<Self> {
        let n = magnitudes.len();
        let f = StepFunction::new((1..=n).map(|i| i as f64).collect(), magnitudes.iter().map(|m| m.abs()).collect(), None, Domain::Halfline)?;
        f.rearrange()
    }

    pub fn as_step(&self) -> &StepFunction {
        &self.0
    }

    pub fn into_step(self) -> StepFunction {
        self.0
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.0.eval(t)
    }

    pub fn integral_to(&self, t: f64) -> f64 {
        self.0.integral_to(t)
    }

    /// `f**(t) = (1/t) ∫_0^t f*`.
    pub fn hardy_average(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::InvalidInput(format!("Hardy average needs t > 0, got {t}")));
        }
        Ok(self.0.integral_to(t) / t)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale(s.abs()))
    }
}

/// `μ{w > λ}` for a weight with non-overlapping terms.
pub fn weight_distribution(w: &Weight, lambda: f64) -> Result<f64> {
    let pieces = w.pieces()?;
    let m: f64 = pieces.iter().map(|t| t.f.superlevel_measure(lambda, t.lo, t.hi)).sum();
    if m == f64::INFINITY && lambda > 0.0 {
        return Err(Error::NonRearrangeable { level: lambda });
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distribution_examples() {
        let f = StepFunction::from_intervals(Domain::Unit, &[(0.0, 0.25, 2.0), (0.25, 0.5, 1.0)]).unwrap();
        assert_eq!(f.distribution(1.5).unwrap(), 0.25);
        let g = StepFunction::from_intervals(Domain::Unit, &[(0.0, 1.0 / 3.0, 1.0)]).unwrap();
        assert_eq!(g.distribution(0.5).unwrap(), 1.0 / 3.0);
        let w = Weight::parse("t^-0.5 on(0,1)").unwrap();
        assert!((weight_distribution(&w, 2.0).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn rearrange_example() {
        let f = StepFunction::from_intervals(Domain::Halfline, &[(0.5, 0.75, 1.0), (0.1, 0.2, 2.0)]).unwrap();
        let r = f.rearrange().unwrap();
        assert_eq!(r.as_step().values(), &[2.0, 1.0]);
        let b = r.as_step().breakpoints();
        assert!((b[0] - 0.1).abs() < 1e-15 && (b[1] - 0.35).abs() < 1e-15);
        assert_eq!(r.eval(0.5), 0.0);
    }

    #[test]
    fn constant_tail_is_not_rearrangeable() {
        let f = StepFunction::indicator(0.0, 1.0).unwrap().with_tail(PowerLog::constant(0.5)).unwrap();
        assert!(matches!(f.distribution(0.25), Err(Error::NonRearrangeable { .. })));
        assert!(matches!(f.rearrange(), Err(Error::NonRearrangeable { .. })));
    }

    #[test]
    fn decaying_tail_rearranges_in_place() {
        let f = StepFunction::from_cells(&[1.0], &[2.0]).unwrap().with_tail(PowerLog::power(1.0, -2.0)).unwrap();
        let r = f.rearrange().unwrap();
        assert_eq!(r.as_step(), &f);
        assert!((r.hardy_average(2.0).unwrap() - (2.0 + 0.5) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn hardy_average_examples() {
        let f = StepFunction::indicator(0.0, 0.25).unwrap().rearrange().unwrap();
        assert_eq!(f.hardy_average(0.1).unwrap(), 1.0);
        assert_eq!(f.hardy_average(1.0).unwrap(), 0.25);
        assert!(f.hardy_average(0.0).is_err());
    }

    #[test]
    fn weighted_integral_examples() {
        let f = StepFunction::indicator(0.0, 1.0).unwrap();
        assert_eq!(f.weighted_integral(&Weight::indicator(0.0, 1.0), 1.0).unwrap(), 1.0);
        let log = Weight::parse("t^0*L^1 on(0,1)").unwrap();
        assert!((f.weighted_integral(&log, 1.0).unwrap() - 2.0).abs() < 1e-12);
        let omega = Weight::omega(1.0);
        assert!((omega.power_integral_against(1.0, &Weight::power(1.0, 0.0)).unwrap() - 2.0).abs() < 1e-14);
        let g = StepFunction::indicator(0.0, 1.0).unwrap();
        assert_eq!(g.weighted_integral(&Weight::parse("t^-1").unwrap(), 1.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn json_schema() {
        let f = StepFunction::from_cells(&[0.5, 0.5], &[2.0, 1.0]).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"breakpoints":[0.5,1.0],"values":[2.0,1.0],"tail":null,"domain":"halfline"}"#);
        let back: StepFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }
}
