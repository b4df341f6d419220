//! Geometric parameter grids and supremum sweeps with divergence detection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Value above which a still-rising objective is declared divergent.
/// Relative offset used to approach finite range ends.
const EDGE_NUDGE: f64 = 1e-12;

pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// A geometric grid on `[t_min, t_max]` with `per_decade` points per factor of ten.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub t_min: f64,
    pub t_max: f64,
    pub per_decade: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Self { t_min: 1e-6, t_max: 1e6, per_decade: 64 }
    }
}

impl Grid {
    pub fn new(t_min: f64, t_max: f64, per_decade: usize) -> crate::Result<Self> {
        if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
            return crate::error::invalid(format!("grid range [{t_min}, {t_max}] is not a positive interval"));
        }
        if per_decade < 8 {
            return crate::error::invalid(format!("grid density {per_decade} below 8 points per decade"));
        }
        Ok(Self { t_min, t_max, per_decade })
    }

    /// All grid points, increasing.
    pub fn points(&self) -> Vec<f64> {
        geometric(self.t_min, self.t_max, self.per_decade)
    }

    /// Grid points strictly inside `(lo, hi)`.
    pub fn points_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.points().into_iter().filter(|&t| t > lo && t < hi).collect()
    }
}

/// Geometric points from `a` to `b` inclusive, `per_decade` per factor of ten.
pub fn geometric(a: f64, b: f64, per_decade: usize) -> Vec<f64> {
    if !(b > a) {
        return vec![a];
    }
    let decades = (b / a).log10();
    let n = (decades * per_decade as f64).ceil().max(1.0) as usize;
    let la = a.ln();
    let step = (b / a).ln() / n as f64;
    let mut pts: Vec<f64> = (0..=n).map(|i| (la + step * i as f64).exp()).collect();
    pts[0] = a;
    pts[n] = b;
    pts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Finite,
    Infinite,
    Undecided,
}

/// Outcome of a grid supremum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupResult {
    #[serde(with = "crate::serde_ext::extended_f64")]
    pub value: f64,
    #[serde(with = "crate::serde_ext::extended_f64")]
    pub argmax: f64,
    pub verdict: Verdict,
    pub evaluations: usize,
    /// Parameter range actually swept, including any divergence extension.
    pub swept: [f64; 2],
}

/// Supremum of `f` over the open parameter range `(lo, hi)`.
///
/// The sweep uses the grid points inside the range plus `extra` points.
/// When the maximum sits at a grid edge that does not reach the range end,
/// the sweep continues decade by decade while the objective keeps rising.
pub fn sup_1d<F>(f: F, lo: f64, hi: f64, grid: &Grid, extra: &[f64]) -> SupResult
where
    F: Fn(f64) -> f64 + Sync,
{
    let mut pts = grid.points_in(lo, hi);
    pts.extend(extra.iter().copied().filter(|&t| t >= lo && t <= hi && t.is_finite()));
    // approach finite nonzero range ends
    if lo > 0.0 && lo.is_finite() && !pts.contains(&lo) {
        pts.push(lo * (1.0 + EDGE_NUDGE));
    }
    if hi.is_finite() && hi > lo && !pts.contains(&hi) {
        pts.push(hi * (1.0 - EDGE_NUDGE));
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.is_empty() {
        return SupResult {
            value: 0.0,
            argmax: f64::NAN,
            verdict: Verdict::Undecided,
            evaluations: 0,
            swept: [lo, hi],
        };
    }
    let vals: Vec<f64> = pts.par_iter().map(|&t| sanitize(f(t))).collect();
    let mut evaluations = pts.len();
    let (mut best_i, mut best) = (0, f64::NEG_INFINITY);
    for (i, &v) in vals.iter().enumerate() {
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let mut argmax = pts[best_i];
    let mut swept = [pts[0], pts[pts.len() - 1]];
    if best == f64::INFINITY {
        return SupResult { value: best, argmax, verdict: Verdict::Infinite, evaluations, swept };
    }
    let step = 10f64.powf(1.0 / grid.per_decade as f64);
    let mut verdict = Verdict::Finite;
    let n = pts.len();
    // rising towards the upper edge
    let upper_open = hi > pts[n - 1] * (1.0 + 1e-12);
    if best_i == n - 1 && upper_open && n >= 2 && vals[n - 1] >= vals[n - 2] {
        let ext = extend(&f, pts[n - 1], best, step, grid.per_decade, hi.is_finite(), |t| t < hi && t < 1e300);
        evaluations += ext.evaluations;
        swept[1] = ext.reached;
        if ext.value > best {
            best = ext.value;
            argmax = ext.arg;
        }
        verdict = ext.verdict;
    }
    let lower_open = lo < pts[0] * (1.0 - 1e-12);
    if best_i == 0 && lower_open && n >= 2 && vals[0] >= vals[1] {
        let ext = extend(&f, pts[0], best, 1.0 / step, grid.per_decade, lo > 0.0, |t| t > lo && t > 1e-300);
        evaluations += ext.evaluations;
        swept[0] = ext.reached;
        if ext.value > best {
            best = ext.value;
            argmax = ext.arg;
        }
        verdict = ext.verdict;
    }
    SupResult { value: best, argmax, verdict, evaluations, swept }
}

struct Extension {
    value: f64,
    arg: f64,
    verdict: Verdict,
    evaluations: usize,
    reached: f64,
}

fn extend<F, C>(
    f: &F,
    start: f64,
    start_val: f64,
    ratio: f64,
    per_decade: usize,
    bounded: bool,
    inside: C,
) -> Extension
where
    F: Fn(f64) -> f64 + Sync,
    C: Fn(f64) -> bool,
{
    let mut t = start;
    let mut best = start_val;
    let mut arg = start;
    let mut evaluations = 0;
    loop {
        // one decade at a time
        let mut decade = Vec::with_capacity(per_decade);
        let mut s = t;
        for _ in 0..per_decade {
            s *= ratio;
            if !inside(s) {
                break;
            }
            decade.push(s);
        }
        if decade.is_empty() {
            let verdict = if best > DIVERGENCE_THRESHOLD {
                Verdict::Infinite
            } else if bounded {
                // the sweep reached a finite range end
                Verdict::Finite
            } else {
                Verdict::Undecided
            };
            return Extension { value: best, arg, verdict, evaluations, reached: t };
        }
        let vals: Vec<f64> = decade.par_iter().map(|&s| sanitize(f(s))).collect();
        evaluations += vals.len();
        let decade_start_best = best;
        let mut rising = true;
        for (&s, &v) in decade.iter().zip(&vals) {
            if v == f64::INFINITY {
                return Extension { value: v, arg: s, verdict: Verdict::Infinite, evaluations, reached: s };
            }
            if v > best {
                best = v;
                arg = s;
            }
        }
        let last = *vals.last().unwrap();
        if last < best {
            rising = false;
        }
        // a rise that has saturated in floating point is a finite limit
        let saturated = best <= decade_start_best * (1.0 + 1e-9) + 1e-300;
        t = *decade.last().unwrap();
        if !rising || saturated {
            return Extension { value: best, arg, verdict: Verdict::Finite, evaluations, reached: t };
        }
        if best > DIVERGENCE_THRESHOLD {
            return Extension { value: best, arg, verdict: Verdict::Infinite, evaluations, reached: t };
        }
    }
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_density() {
        let g = Grid::default();
        let p = g.points();
        assert_eq!(p.len(), 12 * 64 + 1);
        assert_eq!(p[0], 1e-6);
        assert_eq!(*p.last().unwrap(), 1e6);
    }

    #[test]
    fn interior_maximum_is_finite() {
        let r = sup_1d(|x| x * (-x).exp(), 0.0, f64::INFINITY, &Grid::default(), &[]);
        assert_eq!(r.verdict, Verdict::Finite);
        assert!((r.value - (-1f64).exp()).abs() < 1e-4);
    }

    #[test]
    fn slow_divergence_found_by_extension() {
        // x^{-1/2}/(1+log(1/x)) on (0,1)
        let r = sup_1d(|x: f64| x.powf(-0.5) / (1.0 - x.ln()), 0.0, 1.0, &Grid::default(), &[1.0]);
        assert_eq!(r.verdict, Verdict::Infinite);
        assert!(r.value > DIVERGENCE_THRESHOLD);
    }

    #[test]
    fn saturating_rise_is_finite() {
        let r = sup_1d(|x: f64| 1.0 - 1.0 / x, 1.0, f64::INFINITY, &Grid::default(), &[]);
        assert_eq!(r.verdict, Verdict::Finite);
        assert!(r.value <= 1.0);
    }

    #[test]
    fn endpoint_extra_point() {
        let r = sup_1d(|x| x, 0.0, 1.0, &Grid::default(), &[1.0]);
        assert_eq!(r.value, 1.0);
        assert_eq!(r.verdict, Verdict::Finite);
    }
}
