//! Least concave majorants and level functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::powerlog::PowerLog;
use crate::stepfn::{DecreasingStep, Domain, StepFunction};
use crate::weight::{Term, Weight};

/// Sample density used on non-constant decreasing pieces of a weight.
const ARC_SAMPLES_PER_DECADE: usize = 64;

/// Behaviour of a majorant beyond its last node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MajorantTail {
    /// Continues linearly with the given slope.
    Linear { slope: f64 },
    /// Follows `y_last + ∫_{x_last}^x density`, a concave curve.
    Curve { density: PowerLog },
}

/// A concave piecewise-linear function through `nodes`, continued by `tail`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcaveMajorant {
    nodes: Vec<(f64, f64)>,
    tail: MajorantTail,
}

impl ConcaveMajorant {
    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn tail(&self) -> MajorantTail {
        self.tail
    }

    /// Slope as `x → ∞`.
    pub fn slope_at_infinity(&self) -> f64 {
        match self.tail {
            MajorantTail::Linear { slope } => slope,
            MajorantTail::Curve { density } => density.limit_at_infinity(),
        }
    }

    /// Slopes of consecutive node pairs.
    pub fn slopes(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| slope(w[0], w[1])).collect()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        let (xl, yl) = self.nodes[n - 1];
        if x >= xl {
            return match self.tail {
                MajorantTail::Linear { slope } => yl + slope * (x - xl),
                MajorantTail::Curve { density } => yl + density.integral(xl, x),
            };
        }
        let i = self.nodes.partition_point(|p| p.0 <= x);
        if i == 0 {
            // left of the first node: extend the first segment
            let s = if n >= 2 { slope(self.nodes[0], self.nodes[1]) } else { 0.0 };
            return self.nodes[0].1 + s * (x - self.nodes[0].0);
        }
        let (a, b) = (self.nodes[i - 1], self.nodes[i]);
        a.1 + slope(a, b) * (x - a.0)
    }

    /// Right derivative at `x`.
    pub fn right_derivative(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if x >= self.nodes[n - 1].0 {
            return match self.tail {
                MajorantTail::Linear { slope } => slope,
                MajorantTail::Curve { density } => density.eval(x),
            };
        }
        let i = self.nodes.partition_point(|p| p.0 <= x).max(1);
        slope(self.nodes[i - 1], self.nodes[i])
    }

    /// The derivative as a decreasing step function (linear tails only decay to
    /// a constant; curve tails are carried over).
    pub fn derivative(&self) -> Result<DecreasingStep> {
        let bps: Vec<f64> = self.nodes.iter().skip(1).map(|p| p.0).collect();
        let vals = self.slopes();
        let tail = match self.tail {
            MajorantTail::Linear { slope } if slope > 0.0 => Some(PowerLog::constant(slope)),
            MajorantTail::Linear { .. } => None,
            MajorantTail::Curve { density } => Some(density),
        };
        let (bps, vals) = trim_leading_zero_node(bps, vals);
        DecreasingStep::new(StepFunction::new(bps, vals, tail, Domain::Halfline)?)
    }
}

fn trim_leading_zero_node(bps: Vec<f64>, vals: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    // a node at x=0 produces no cell; breakpoints are already right endpoints
    let keep: Vec<usize> = (0..bps.len()).filter(|&i| bps[i] > 0.0).collect();
    (keep.iter().map(|&i| bps[i]).collect(), keep.iter().map(|&i| vals[i]).collect())
}

#[inline]
fn slope(a: (f64, f64), b: (f64, f64)) -> f64 {
    (b.1 - a.1) / (b.0 - a.0)
}

/// Least concave majorant of the piecewise-linear function through `nodes`
/// that continues with slope `tail_slope` after the last node.
pub fn least_concave_majorant(nodes: &[(f64, f64)], tail_slope: f64) -> Result<ConcaveMajorant> {
    validate_nodes(nodes)?;
    if !tail_slope.is_finite() {
        return Err(Error::RequiresLimit("function does not lie under any line".into()));
    }
    let hull = upper_hull(nodes.iter().copied());
    Ok(finish_linear(hull, tail_slope))
}

fn validate_nodes(nodes: &[(f64, f64)]) -> Result<()> {
    if nodes.is_empty() {
        return Err(Error::InvalidInput("majorant needs at least one node".into()));
    }
    let mut prev = f64::NEG_INFINITY;
    for &(x, y) in nodes {
        if !(x > prev) || x < 0.0 || !x.is_finite() || !y.is_finite() || y < 0.0 {
            return Err(Error::InvalidInput(
                "nodes need strictly increasing x ≥ 0 and finite y ≥ 0".into(),
            ));
        }
        prev = x;
    }
    Ok(())
}

fn upper_hull(points: impl Iterator<Item = (f64, f64)>) -> Vec<(f64, f64)> {
    let mut h: Vec<(f64, f64)> = Vec::new();
    for p in points {
        while h.len() >= 2 {
            let (o, a) = (h[h.len() - 2], h[h.len() - 1]);
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            let scale = ((a.0 - o.0) * (p.1 - o.1)).abs() + ((a.1 - o.1) * (p.0 - o.0)).abs();
            if cross >= -1e-14 * scale {
                h.pop();
            } else {
                break;
            }
        }
        h.push(p);
    }
    h
}

fn finish_linear(mut hull: Vec<(f64, f64)>, s: f64) -> ConcaveMajorant {
    while hull.len() >= 2 && slope(hull[hull.len() - 2], hull[hull.len() - 1]) <= s {
        hull.pop();
    }
    ConcaveMajorant { nodes: hull, tail: MajorantTail::Linear { slope: s } }
}

/// A node of a cumulative integral; `arc` is the density on the span to the
/// next node when that span lies on a concave arc of the cumulative.
#[derive(Debug, Clone, Copy)]
struct Node {
    x: f64,
    y: f64,
    arc: Option<PowerLog>,
}

/// Level function `u°` with its majorant `∫_0^x u°`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub majorant: ConcaveMajorant,
    pub density: Weight,
}

/// Level function of a step function; exact.
pub fn level_function(u: &StepFunction) -> Result<DecreasingStep> {
    if u.is_nonincreasing() && u.values().iter().all(|&v| v > 0.0) {
        return DecreasingStep::new(u.clone());
    }
    let mut nodes = vec![Node { x: 0.0, y: 0.0, arc: None }];
    for (x, y) in u.cumulative_nodes().into_iter().skip(1) {
        nodes.push(Node { x, y, arc: None });
    }
    let tail = u.tail().copied();
    let lvl = level_core(nodes, tail)?;
    lvl.majorant.derivative()
}

/// Level function of a weight. Exact on constant pieces and on decaying
/// power-log tails; decreasing non-constant finite pieces are resolved on a
/// geometric sample of nodes, with `u° = u` wherever the hull follows them.
pub fn level_weight(u: &Weight) -> Result<Level> {
    if u.is_nonincreasing() {
        let density = u.clone();
        let majorant = cumulative_as_majorant(u)?;
        return Ok(Level { majorant, density });
    }
    let parts = u.partition();
    let mut nodes = vec![Node { x: 0.0, y: 0.0, arc: None }];
    let mut tail: Option<PowerLog> = None;
    let mut y = 0.0;
    for (a, b, fs) in parts {
        if nodes.last().unwrap().x < a {
            nodes.push(Node { x: a, y, arc: None });
        }
        let f = single(&fs)?;
        if b == f64::INFINITY {
            tail = Some(f);
            break;
        }
        if f.is_constant() {
            y += f.c * (b - a);
            nodes.push(Node { x: b, y, arc: None });
            continue;
        }
        let mut cuts = vec![a];
        cuts.extend(f.monotone_breaks(a, b));
        cuts.push(b);
        for w in cuts.windows(2) {
            let (p, q) = (w[0], w[1]);
            if f.is_nonincreasing_on(p, q) {
                let start = if p > 0.0 { p } else { (q * 1e-12).max(1e-300) };
                let samples = crate::grid::geometric(start, q, ARC_SAMPLES_PER_DECADE);
                let mut xprev = p;
                nodes.last_mut().unwrap().arc = Some(f);
                for &x in samples.iter().filter(|&&x| x > p) {
                    y += f.integral(xprev, x);
                    nodes.push(Node { x, y, arc: Some(f) });
                    xprev = x;
                }
                nodes.last_mut().unwrap().arc = None;
            } else {
                y += f.integral(p, q);
                nodes.push(Node { x: q, y, arc: None });
            }
        }
    }
    let (majorant, density) = level_core_with_density(nodes, tail)?;
    Ok(Level { majorant, density })
}

fn single(fs: &[PowerLog]) -> Result<PowerLog> {
    if fs.len() == 1 {
        return Ok(fs[0]);
    }
    if fs.iter().all(|f| f.is_constant()) {
        return Ok(PowerLog::constant(fs.iter().map(|f| f.c).sum()));
    }
    Err(Error::Unsupported("level function of overlapping non-constant weight terms".into()))
}

fn cumulative_as_majorant(u: &Weight) -> Result<ConcaveMajorant> {
    // a non-increasing weight is its own level function; record its cumulative
    let mut nodes = vec![(0.0, 0.0)];
    let mut tail = MajorantTail::Linear { slope: 0.0 };
    let mut y = 0.0;
    for (a, b, fs) in u.partition() {
        let f = single(&fs)?;
        if b == f64::INFINITY {
            if nodes.last().unwrap().0 < a {
                nodes.push((a, y));
            }
            tail = if f.is_constant() {
                MajorantTail::Linear { slope: f.c }
            } else {
                MajorantTail::Curve { density: f }
            };
            break;
        }
        y += f.integral(a, b);
        nodes.push((b, y));
    }
    Ok(ConcaveMajorant { nodes, tail })
}

fn level_core(nodes: Vec<Node>, tail: Option<PowerLog>) -> Result<Level> {
    let (majorant, density) = level_core_with_density(nodes, tail)?;
    Ok(Level { majorant, density })
}

fn level_core_with_density(mut nodes: Vec<Node>, tail: Option<PowerLog>) -> Result<(ConcaveMajorant, Weight)> {
    // split a non-monotone tail into finite sampled pieces and a decaying remainder
    let mut tail = tail;
    if let Some(f) = tail {
        let start = nodes.last().unwrap().x;
        if f.limit_at_infinity() == f64::INFINITY {
            return Err(Error::RequiresLimit("cumulative integral does not lie under any line".into()));
        }
        if !f.is_constant() && !f.is_nonincreasing_on(start, f64::INFINITY) {
            let breaks = f.monotone_breaks(start, f64::INFINITY);
            let last = *breaks.last().unwrap();
            let mut y = nodes.last().unwrap().y;
            let mut cuts = vec![start];
            cuts.extend(breaks);
            for w in cuts.windows(2) {
                let (p, q) = (w[0], w[1]);
                if f.is_nonincreasing_on(p, q) {
                    let s = if p > 0.0 { p } else { (q * 1e-12).max(1e-300) };
                    let samples = crate::grid::geometric(s, q, ARC_SAMPLES_PER_DECADE);
                    let mut xprev = p;
                    nodes.last_mut().unwrap().arc = Some(f);
                    for &x in samples.iter().filter(|&&x| x > p) {
                        y += f.integral(xprev, x);
                        nodes.push(Node { x, y, arc: Some(f) });
                        xprev = x;
                    }
                    nodes.last_mut().unwrap().arc = None;
                } else {
                    y += f.integral(p, q);
                    nodes.push(Node { x: q, y, arc: None });
                }
            }
            debug_assert_eq!(nodes.last().unwrap().x, last);
            tail = Some(f);
        }
    }

    let pts: Vec<(f64, f64)> = nodes.iter().map(|n| (n.x, n.y)).collect();
    let idx_hull = upper_hull_indices(&pts);
    let mut stack: Vec<usize> = idx_hull;

    let (majorant_nodes, mtail, curve_start): (Vec<(f64, f64)>, MajorantTail, Option<(f64, PowerLog)>) = match tail {
        None => {
            let h = finish_indices(&pts, stack, 0.0);
            (h.iter().map(|&i| pts[i]).collect(), MajorantTail::Linear { slope: 0.0 }, None)
        }
        Some(f) if f.is_constant() => {
            let h = finish_indices(&pts, stack, f.c);
            stack = h;
            (stack.iter().map(|&i| pts[i]).collect(), MajorantTail::Linear { slope: f.c }, None)
        }
        Some(f) => {
            let (xt, yt) = *pts.last().unwrap();
            let g = |tau: f64| yt + f.integral(xt, tau);
            loop {
                let v = pts[*stack.last().unwrap()];
                let prev_slope = if stack.len() >= 2 { Some(slope(pts[stack[stack.len() - 2]], v)) } else { None };
                let (tau, chord) = if v.0 >= xt {
                    (xt, f.eval(xt))
                } else {
                    match tangent_point(v, xt, &f, &g) {
                        Some(tau) => (tau, f.eval(tau)),
                        None => (f64::INFINITY, 0.0),
                    }
                };
                if let Some(ps) = prev_slope {
                    if ps <= chord {
                        stack.pop();
                        continue;
                    }
                }
                let mut out: Vec<(f64, f64)> = stack.iter().map(|&i| pts[i]).collect();
                if tau.is_infinite() {
                    break (out, MajorantTail::Linear { slope: 0.0 }, None);
                }
                if tau > v.0 {
                    out.push((tau, g(tau)));
                }
                break (out, MajorantTail::Curve { density: f }, Some((tau, f)));
            }
        }
    };

    // density: chords are constant, hull edges that follow an arc keep u
    let mut terms: Vec<Term> = Vec::new();
    let find = |x: f64| pts.iter().position(|p| p.0 == x);
    for w in majorant_nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        let on_arc = match (find(a.0), find(b.0)) {
            (Some(i), Some(j)) if j == i + 1 => nodes[i].arc,
            _ => None,
        };
        match on_arc {
            Some(f) => push_term(&mut terms, Term::new(f, a.0, b.0)),
            None => {
                let s = slope(a, b);
                if s > 0.0 {
                    push_term(&mut terms, Term::new(PowerLog::constant(s), a.0, b.0));
                }
            }
        }
    }
    let last_x = majorant_nodes.last().unwrap().0;
    match (mtail, curve_start) {
        (MajorantTail::Linear { slope }, _) if slope > 0.0 => {
            push_term(&mut terms, Term::new(PowerLog::constant(slope), last_x, f64::INFINITY));
        }
        (_, Some((tau, f))) => push_term(&mut terms, Term::new(f, tau, f64::INFINITY)),
        _ => {}
    }
    Ok((ConcaveMajorant { nodes: majorant_nodes, tail: mtail }, Weight::from_terms_lossy(terms)))
}

fn push_term(terms: &mut Vec<Term>, t: Term) {
    if let Some(last) = terms.last_mut() {
        if last.f == t.f && last.hi == t.lo {
            last.hi = t.hi;
            return;
        }
    }
    terms.push(t);
}

fn upper_hull_indices(pts: &[(f64, f64)]) -> Vec<usize> {
    let mut h: Vec<usize> = Vec::new();
    for (k, &p) in pts.iter().enumerate() {
        while h.len() >= 2 {
            let (o, a) = (pts[h[h.len() - 2]], pts[h[h.len() - 1]]);
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            let scale = ((a.0 - o.0) * (p.1 - o.1)).abs() + ((a.1 - o.1) * (p.0 - o.0)).abs();
            if cross >= -1e-14 * scale {
                h.pop();
            } else {
                break;
            }
        }
        h.push(k);
    }
    h
}

fn finish_indices(pts: &[(f64, f64)], mut h: Vec<usize>, s: f64) -> Vec<usize> {
    while h.len() >= 2 && slope(pts[h[h.len() - 2]], pts[h[h.len() - 1]]) <= s {
        h.pop();
    }
    h
}

/// Point `τ ≥ xt` where the chord from `v` touches the concave curve
/// `g(τ) = yt + ∫_{xt}^τ f`; `None` when the curve stays below `v`.
fn tangent_point(v: (f64, f64), xt: f64, f: &PowerLog, g: &impl Fn(f64) -> f64) -> Option<f64> {
    let phi = |tau: f64| g(tau) - v.1 - f.eval(tau) * (tau - v.0);
    if phi(xt) >= 0.0 {
        return Some(xt);
    }
    let mut lo = xt;
    let mut hi = xt.max(1.0) * 2.0;
    while phi(hi) < 0.0 {
        lo = hi;
        hi *= 4.0;
        if hi > 1e300 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if !(mid > lo && mid < hi) {
            break;
        }
        if phi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(hi)
}

/// Checks that the majorant of `g` is linear through the origin on `(0, ξ)`
/// when `g(x) = c·x` there.
pub fn lcm_segment_check(g: &[(f64, f64)], xi: f64, c: f64) -> Result<bool> {
    validate_nodes(g)?;
    if !(xi > 0.0) || !(c >= 0.0) {
        return Err(Error::InvalidInput("need ξ > 0 and c ≥ 0".into()));
    }
    if g[0].0 != 0.0 || g.last().unwrap().0 < xi {
        return Err(Error::InvalidInput("nodes must start at 0 and reach ξ".into()));
    }
    let gx = interpolate(g, xi);
    for &(x, y) in g.iter().filter(|p| p.0 <= xi) {
        if (y - c * x).abs() > 1e-12 * (1.0 + c * x) {
            return Err(Error::Hypothesis(format!("g is not c·x on (0, ξ): g({x}) = {y}")));
        }
    }
    if (gx - c * xi).abs() > 1e-12 * (1.0 + c * xi) {
        return Err(Error::Hypothesis("g is not c·x on (0, ξ)".into()));
    }
    let m = least_concave_majorant(g, 0.0)?;
    let at_xi = m.eval(xi);
    let ok = (0..=64).all(|k| {
        let x = xi * k as f64 / 64.0;
        (m.eval(x) - x * at_xi / xi).abs() <= 1e-12 * (1.0 + at_xi)
    });
    Ok(ok)
}

fn interpolate(g: &[(f64, f64)], x: f64) -> f64 {
    let i = g.partition_point(|p| p.0 <= x);
    if i == 0 {
        return g[0].1;
    }
    if i == g.len() {
        return g[i - 1].1;
    }
    let (a, b) = (g[i - 1], g[i]);
    a.1 + slope(a, b) * (x - a.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concave_input_is_fixed() {
        let g = [(0.0, 0.0), (1.0, 1.0), (2.0, 1.5), (4.0, 2.0)];
        let m = least_concave_majorant(&g, 0.0).unwrap();
        assert_eq!(m.nodes(), &g);
    }

    #[test]
    fn min_x_one() {
        let m = least_concave_majorant(&[(0.0, 0.0), (1.0, 1.0)], 0.0).unwrap();
        assert_eq!(m.eval(0.5), 0.5);
        assert_eq!(m.eval(3.0), 1.0);
    }

    #[test]
    fn shifted_indicator() {
        let u = StepFunction::indicator(1.0, 2.0).unwrap();
        let lv = level_function(&u).unwrap();
        assert_eq!(lv.as_step().values(), &[0.5]);
        assert_eq!(lv.as_step().breakpoints(), &[2.0]);
    }

    #[test]
    fn decreasing_is_fixed_point() {
        let u = StepFunction::from_cells(&[0.5, 1.0, 2.0], &[3.0, 2.0, 0.5]).unwrap();
        let lv = level_function(&u).unwrap();
        assert_eq!(lv.as_step(), &u);
    }

    #[test]
    fn growing_tail_requires_limit() {
        let u = StepFunction::indicator(0.0, 1.0).unwrap().with_tail(PowerLog::power(1.0, 0.5)).unwrap();
        assert!(matches!(level_function(&u), Err(Error::RequiresLimit(_))));
        assert!(matches!(least_concave_majorant(&[(0.0, 0.0)], f64::INFINITY), Err(Error::RequiresLimit(_))));
    }

    #[test]
    fn decaying_tail_tangency() {
        // u = 0 on (0,1), t^{-2} after: ∫_0^x u = 1 - 1/x for x>1
        let u = StepFunction::from_cells(&[1.0], &[0.0]).unwrap().with_tail(PowerLog::power(1.0, -2.0)).unwrap();
        let lv = level_function(&u).unwrap();
        // tangent from the origin to 1-1/x touches at x=2, slope 1/4
        let s = lv.as_step();
        assert!((s.values()[0] - 0.25).abs() < 1e-12);
        assert!((s.breakpoints()[0] - 2.0).abs() < 1e-9);
        assert!((lv.eval(3.0) - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn weight_level_matches_step_level() {
        let w = Weight::parse("t^0 on(0,1) + t^0 on(2,3)").unwrap();
        let lw = level_weight(&w).unwrap();
        let u = StepFunction::from_intervals(Domain::Halfline, &[(0.0, 1.0, 1.0), (2.0, 3.0, 1.0)]).unwrap();
        let ls = level_function(&u).unwrap();
        for x in [0.1, 0.9, 1.5, 2.5, 2.9, 4.0] {
            assert!((lw.density.eval(x) - ls.eval(x)).abs() < 1e-14, "{x}");
        }
    }

    #[test]
    fn chord_segment_check() {
        let g = [(0.0, 0.0), (1.0, 0.0), (2.0, 1.0), (3.0, 1.2)];
        assert!(lcm_segment_check(&g, 1.0, 0.0).unwrap());
        let g = [(0.0, 0.0), (0.5, 0.5), (1.0, 1.0), (2.0, 1.2)];
        assert!(lcm_segment_check(&g, 1.0, 1.0).unwrap());
        assert!(lcm_segment_check(&[(0.0, 0.0), (1.0, 2.0)], 1.0, 1.0).is_err());
    }
}
