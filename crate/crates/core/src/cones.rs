//! Generalized quasi-concave cones `Ω_{α,β}`, the restricted cones `P_ξ^β`,
//! their extremal kernels and the positive operators `K_ξ^{α,β}`.
//!
//! A function `f ≥ 0` lies in `Ω_{α,β}` when `t^α f(t)` is non-decreasing and
//! `t^{-β} f(t)` is non-increasing; it lies in `P_ξ^β` when in addition
//! `t^{-β} f(t)` is constant on `(0, ξ)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::averaging::AveragingOp;
use crate::error::{Error, Result};
use crate::grid::{self, Grid, SupResult};
use crate::level::{ConcaveMajorant, MajorantTail};
use crate::norms::GridMeta;
use crate::powerlog::PowerLog;
use crate::quad::{integrate_log, REL_TOL};
use crate::stepfn::StepFunction;
use crate::weight::{Term, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeParams {
    pub alpha: f64,
    pub beta: f64,
    pub xi: f64,
}

impl ConeParams {
    pub fn new(alpha: f64, beta: f64, xi: f64) -> Result<Self> {
        if !(alpha + beta > 0.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidInput(format!("cone needs α + β > 0, got α = {alpha}, β = {beta}")));
        }
        if !(xi >= 0.0) || !xi.is_finite() {
            return Err(Error::InvalidInput(format!("ξ must be finite and ≥ 0, got {xi}")));
        }
        Ok(Self { alpha, beta, xi })
    }

    /// The cone used for Fourier series weights: `Ω_{2,0}` with `ξ = 1`.
    pub fn omega() -> Self {
        Self { alpha: 2.0, beta: 0.0, xi: 1.0 }
    }
}

/// `k^{α,β}(x, t) = min(x^β t^{-α}, x^{-α} t^β)`.
pub fn kernel_value(alpha: f64, beta: f64, x: f64, t: f64) -> f64 {
    if x <= t {
        x.powf(beta) * t.powf(-alpha)
    } else {
        x.powf(-alpha) * t.powf(beta)
    }
}

/// The section `x ↦ k^{α,β}(x, t)` as a weight.
pub fn kernel(alpha: f64, beta: f64, t: f64) -> Result<Weight> {
    if !(alpha + beta > 0.0) {
        return Err(Error::InvalidInput(format!("kernel needs α + β > 0, got α = {alpha}, β = {beta}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("kernel section needs 0 < t < ∞, got {t}")));
    }
    Weight::new(vec![
        Term::new(PowerLog::new(t.powf(-alpha), beta, 0.0), 0.0, t),
        Term::new(PowerLog::new(t.powf(beta), -alpha, 0.0), t, f64::INFINITY),
    ])
}

/// `K_ξ^{α,β}` applied to a density `h` plus point masses: an element of
/// `P_ξ^β ∩ Ω_{α,β}`. Closed under sums and positive multiples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeElement {
    params: ConeParams,
    density: Weight,
    /// `(t, mass)` with `t > ξ`; each contributes `mass · k_t`.
    atoms: Vec<(f64, f64)>,
}

/// `K_ξ^{α,β} h` for a step function `h` on `(0, ∞)`.
pub fn apply_k(params: ConeParams, h: &StepFunction) -> Result<ConeElement> {
    if h.tail().is_some() {
        return Err(Error::Unsupported("K is applied to step functions without tails".into()));
    }
    Ok(apply_k_weight(params, &h.to_weight()))
}

/// `K_ξ^{α,β} h` for a weight `h`. Only `h` on `(ξ, ∞)` matters.
pub fn apply_k_weight(params: ConeParams, h: &Weight) -> ConeElement {
    ConeElement { params, density: h.restrict(params.xi, f64::INFINITY), atoms: Vec::new() }
}

impl ConeElement {
    /// The kernel section `mass · k_t`, `t > ξ`.
    pub fn section(params: ConeParams, t: f64, mass: f64) -> Result<Self> {
        if !(t > params.xi) || !t.is_finite() || !(mass > 0.0) {
            return Err(Error::InvalidInput(format!("section needs t > ξ and positive mass, got t = {t}")));
        }
        Ok(Self { params, density: Weight::zero(), atoms: vec![(t, mass)] })
    }

    pub fn params(&self) -> ConeParams {
        self.params
    }

    pub fn density(&self) -> &Weight {
        &self.density
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn eval(&self, x: f64) -> f64 {
        let ConeParams { alpha, beta, xi } = self.params;
        let m = x.max(xi);
        let mut v = 0.0;
        if !self.density.is_zero() {
            let left = self.density.moment(beta, xi, m);
            let right = self.density.moment(-alpha, m, f64::INFINITY);
            if left > 0.0 {
                v += x.powf(-alpha) * left;
            }
            if right > 0.0 {
                v += x.powf(beta) * right;
            }
        }
        for &(t, mass) in &self.atoms {
            v += mass * kernel_value(alpha, beta, x, t);
        }
        v
    }

    pub fn add(&self, other: &ConeElement) -> Result<ConeElement> {
        if self.params != other.params {
            return Err(Error::InvalidInput("cone elements have different parameters".into()));
        }
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        Ok(Self { params: self.params, density: self.density.add(&other.density), atoms })
    }

    pub fn scale(&self, s: f64) -> Result<ConeElement> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidInput(format!("cone scaling must be positive, got {s}")));
        }
        Ok(Self {
            params: self.params,
            density: self.density.scale(s),
            atoms: self.atoms.iter().map(|&(t, m)| (t, m * s)).collect(),
        })
    }

    /// Points where the closed form changes shape.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.density.breakpoints();
        b.extend(self.atoms.iter().map(|a| a.0));
        if self.params.xi > 0.0 {
            b.push(self.params.xi);
        }
        b.retain(|x| *x > 0.0 && x.is_finite());
        b.sort_by(|a, b| a.partial_cmp(b).unwrap());
        b.dedup();
        b
    }

    /// `∫_{x0}^{x1} f(x)^r w(x) dx`.
    pub fn integral_against(&self, r: f64, w: &Weight, x0: f64, x1: f64) -> f64 {
        if self.density.is_zero() && self.atoms.len() == 1 {
            let (t, mass) = self.atoms[0];
            let k = kernel(self.params.alpha, self.params.beta, t).expect("validated section");
            return mass.powf(r) * k.restrict(x0, x1).power_integral_against(r, w).expect("disjoint kernel pieces");
        }
        let mut cuts = self.breakpoints();
        cuts.extend(w.breakpoints());
        cuts.retain(|&c| c > x0 && c < x1);
        cuts.push(x0);
        cuts.push(x1);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut total = 0.0;
        for win in cuts.windows(2) {
            let (a, b) = (win[0], win[1]);
            let mid_terms: Vec<&Term> = w.terms().iter().filter(|t| t.lo < b && t.hi > a).collect();
            if mid_terms.is_empty() {
                continue;
            }
            total += integrate_log(|x| self.eval(x).powf(r) * w.eval(x), a, b, REL_TOL);
            if total == f64::INFINITY {
                break;
            }
        }
        total
    }

    /// `‖f‖_{r,w}`.
    pub fn norm(&self, r: f64, w: &Weight) -> f64 {
        self.integral_against(r, w, 0.0, f64::INFINITY).powf(1.0 / r)
    }

    /// `‖A f‖_{r,w}` for an averaging operator `A`.
    pub fn averaged_norm(&self, op: &AveragingOp, r: f64, w: &Weight) -> f64 {
        if op.is_identity() {
            return self.norm(r, w);
        }
        let mut total = 0.0;
        let mut prev = 0.0;
        for &(a, b) in op.intervals() {
            total += self.integral_against(r, w, prev, a);
            let mean = integrate_log(|x| self.eval(x), a, b, REL_TOL) / (b - a);
            total += mean.powf(r) * w.integral(a, b);
            prev = b;
        }
        total += self.integral_against(r, w, prev, f64::INFINITY);
        total.powf(1.0 / r)
    }

    /// Checks cone membership at the given points.
    pub fn certify(&self, points: &[f64]) -> Result<()> {
        let values: Vec<f64> = points.iter().map(|&x| self.eval(x)).collect();
        certify_values(self.params, points, &values)
    }
}

/// Checks that sampled values of `f` are consistent with `P_ξ^β ∩ Ω_{α,β}`:
/// `x^α f` non-decreasing, `x^{-β} f` non-increasing and constant below `ξ`.
pub fn certify_values(params: ConeParams, points: &[f64], values: &[f64]) -> Result<()> {
    let ConeParams { alpha, beta, xi } = params;
    const TOL: f64 = 1e-9;
    let mut prev: Option<(f64, f64, f64)> = None;
    let mut below_xi: Option<f64> = None;
    for (&x, &f) in points.iter().zip(values) {
        if !(f >= 0.0) {
            return Err(Error::Hypothesis(format!("negative or undefined value at x = {x}")));
        }
        let up = x.powf(alpha) * f;
        let down = x.powf(-beta) * f;
        if let Some((px, pu, pd)) = prev {
            if x <= px {
                return Err(Error::InvalidInput("certificate points must increase".into()));
            }
            if up < pu * (1.0 - TOL) {
                return Err(Error::Hypothesis(format!("x^α f decreases near x = {x}")));
            }
            if down > pd * (1.0 + TOL) {
                return Err(Error::Hypothesis(format!("x^(-β) f increases near x = {x}")));
            }
        }
        if x < xi {
            match below_xi {
                None => below_xi = Some(down),
                Some(c) if (down - c).abs() > TOL * c.abs().max(f64::MIN_POSITIVE) => {
                    return Err(Error::Hypothesis(format!("x^(-β) f is not constant on (0, ξ) at x = {x}")));
                }
                _ => {}
            }
        }
        prev = Some((x, up, down));
    }
    Ok(())
}

/// The approximating densities `ℓ_n` for a concave majorant `g̃` that is
/// linear through the origin on `(0, ξ)`: `K_ξ^{0,1} ℓ_n` increases to `g̃`.
///
/// With `φ` the right derivative of `g̃` and `a = g̃(ξ) − ξφ(ξ)` (or `g̃(0+)`
/// when `ξ = 0`), `ℓ_n` is the sum of `φ(∞)` on `(n, n+1)`, `a·n/t` on
/// `(ξ, ξ + 1/n)` and `(φ(t) − φ(t(n+1)/n)) / (t log((n+1)/n))`; the last term
/// is the sum over the corners `x_k` of `g̃` of `d_k / (t log r)` on
/// `[x_k/r, x_k)`, where `d_k` is the drop of `φ` at `x_k`.
pub fn ell_n(majorant: &ConcaveMajorant, xi: f64, n: u32) -> Result<Weight> {
    let n_f = n as f64;
    if !(n_f > xi) {
        return Err(Error::InvalidInput(format!("ℓ_n needs n > ξ, got n = {n}, ξ = {xi}")));
    }
    let phi_inf = match majorant.tail() {
        MajorantTail::Linear { slope } => slope,
        MajorantTail::Curve { .. } => {
            return Err(Error::Unsupported("ℓ_n needs a piecewise-linear majorant".into()));
        }
    };
    let nodes = majorant.nodes();
    let slopes = majorant.slopes();
    if slopes.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-12)) || slopes.last().is_some_and(|&s| s < phi_inf) {
        return Err(Error::InvalidInput("the right derivative of the majorant is not monotone".into()));
    }
    let a = if xi > 0.0 {
        majorant.eval(xi) - xi * majorant.right_derivative(xi)
    } else if nodes[0].0 == 0.0 {
        nodes[0].1
    } else {
        majorant.eval(0.0)
    };
    let mut terms = Vec::new();
    if phi_inf > 0.0 {
        terms.push(Term::new(PowerLog::constant(phi_inf), n_f, n_f + 1.0));
    }
    if a > 0.0 {
        terms.push(Term::new(PowerLog::power(a * n_f, -1.0), xi, xi + 1.0 / n_f));
    }
    let r = (n_f + 1.0) / n_f;
    let log_r = r.ln();
    let mut after: Vec<f64> = slopes.iter().skip(1).copied().collect();
    after.push(phi_inf);
    for (k, (&s_before, &s_after)) in slopes.iter().zip(&after).enumerate() {
        let d = s_before - s_after;
        let xk = nodes[k + 1].0;
        if d > 0.0 {
            terms.push(Term::new(PowerLog::power(d / log_r, -1.0), xk / r, xk));
        }
    }
    Weight::new(terms)
}

/// Seeded cone samples `K_ξ^{α,β} h` with `h` a random positive step function:
/// between one and six cells placed log-uniformly, exponential heights.
pub fn sample_cone(params: ConeParams, seed: u64, count: usize) -> Vec<ConeElement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = if params.xi > 0.0 { (params.xi, params.xi * 1e4) } else { (1e-3, 1e3) };
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..count)
        .map(|_| {
            let k: usize = rng.gen_range(1..=6);
            let mut ends: Vec<f64> = (0..2 * k).map(|_| rng.gen_range(llo..lhi).exp()).collect();
            ends.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut cells = Vec::with_capacity(k);
            for pair in ends.chunks(2) {
                if pair[1] > pair[0] {
                    let v: f64 = -(1.0 - rng.gen::<f64>()).ln();
                    cells.push(Term::new(PowerLog::constant(v.max(1e-6)), pair[0], pair[1]));
                }
            }
            if cells.is_empty() {
                cells.push(Term::new(PowerLog::constant(1.0), lo, lo * 2.0));
            }
            apply_k_weight(params, &Weight::new(cells).expect("positive heights"))
        })
        .collect()
}

/// Kernel-section bracket for `sup_f ‖A f‖_{q,u} / ‖f‖_{p,v}` over `P_ξ^β ∩ Ω_{α,β}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioBounds {
    /// Supremum over kernel sections `k_t`, `t > ξ`, on the grid.
    pub lower: f64,
    /// `factor · lower`.
    pub upper: f64,
    pub factor: f64,
    /// Largest ratio over the supplied cone elements.
    pub sampled: Option<f64>,
    pub grid: GridMeta,
}

/// The kernel-section supremum and its cone-wide ceiling.
///
/// For the identity operator and `0 < p ≤ q` the ceiling factor is `2^{1/q}`;
/// for a proper averaging operator and `0 < p ≤ 1 ≤ q` it is `2`.
pub fn ratio_supremum_bounds(
    params: ConeParams,
    u: &Weight,
    v: &Weight,
    p: f64,
    q: f64,
    op: &AveragingOp,
    samples: &[ConeElement],
    grid: &Grid,
) -> Result<RatioBounds> {
    if !(p > 0.0 && q.is_finite()) {
        return Err(Error::Hypothesis(format!("need 0 < p and q < ∞, got p = {p}, q = {q}")));
    }
    let factor = if op.is_identity() {
        if !(p <= q) {
            return Err(Error::Hypothesis(format!("identity form needs 0 < p ≤ q, got p = {p}, q = {q}")));
        }
        2f64.powf(1.0 / q)
    } else {
        if !(p <= 1.0 && 1.0 <= q) {
            return Err(Error::Hypothesis(format!("averaging form needs 0 < p ≤ 1 ≤ q, got p = {p}, q = {q}")));
        }
        2.0
    };
    let section_ratio = |t: f64| -> f64 {
        let Ok(k) = kernel(params.alpha, params.beta, t) else { return f64::NAN };
        let num = op.apply(&k).power_integral_against(q, u).map(|x| x.powf(1.0 / q));
        let den = k.power_integral_against(p, v).map(|x| x.powf(1.0 / p));
        match (num, den) {
            (Ok(n), Ok(d)) => quotient(n, d),
            _ => f64::NAN,
        }
    };
    let mut extra = u.breakpoints();
    extra.extend(v.breakpoints());
    extra.extend(op.intervals().iter().flat_map(|&(a, b)| [a, b]));
    extra.retain(|&t| t > params.xi && t.is_finite());
    let r: SupResult = grid::sup_1d(section_ratio, params.xi, f64::INFINITY, grid, &extra);
    let lower = if r.verdict == crate::grid::Verdict::Infinite { f64::INFINITY } else { r.value };
    let sampled = if samples.is_empty() {
        None
    } else {
        let vals: Vec<f64> = samples
            .par_iter()
            .map(|f| quotient(f.averaged_norm(op, q, u), f.norm(p, v)))
            .collect();
        Some(vals.into_iter().fold(0.0, f64::max))
    };
    Ok(RatioBounds { lower, upper: factor * lower, factor, sampled, grid: GridMeta::from_sup(grid, &r) })
}

fn quotient(n: f64, d: f64) -> f64 {
    if n == 0.0 {
        0.0
    } else if d == 0.0 || n == f64::INFINITY {
        f64::INFINITY
    } else {
        n / d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::level::least_concave_majorant;

    #[test]
    fn kernel_examples() {
        let z = 3.0;
        let k = kernel(2.0, 0.0, z).unwrap();
        for x in [0.1, 1.0, 3.0, 7.0] {
            assert!((k.eval(x) - Weight::omega(z).eval(x)).abs() < 1e-15);
            assert_eq!(kernel_value(0.0, 1.0, x, 2.0), x.min(2.0));
            let q = 1.5;
            let lhs = kernel_value(2.0, 0.5, x, z).powf(q);
            assert!((lhs - kernel_value(2.0 * q, 0.5 * q, x, z)).abs() < 1e-14 * lhs);
        }
    }

    #[test]
    fn apply_k_examples() {
        let p = ConeParams::new(0.0, 1.0, 0.0).unwrap();
        let f = apply_k(p, &StepFunction::indicator(1.0, 2.0).unwrap()).unwrap();
        assert!((f.eval(3.0) - 1.5).abs() < 1e-14);
        assert!((f.eval(0.5) - 0.5).abs() < 1e-14);
        let h = StepFunction::from_cells(&[0.5, 1.0, 2.0], &[1.0, 3.0, 0.5]).unwrap();
        let g = apply_k(ConeParams::omega(), &h).unwrap();
        let pts = grid::geometric(1e-3, 1e3, 32);
        g.certify(&pts).unwrap();
        assert_eq!(g.eval(0.2), g.eval(0.7));
    }

    #[test]
    fn ell_n_constant_slope() {
        // g̃(x) = 2x: only the φ(∞) term survives
        let m = least_concave_majorant(&[(0.0, 0.0), (1.0, 2.0)], 2.0).unwrap();
        let l = ell_n(&m, 0.0, 4).unwrap();
        assert_eq!(l.terms().len(), 1);
        assert_eq!(l.eval(4.5), 2.0);
    }

    #[test]
    fn ell_n_min_x_one_increases() {
        let m = least_concave_majorant(&[(0.0, 0.0), (1.0, 1.0)], 0.0).unwrap();
        let p = ConeParams::new(0.0, 1.0, 0.0).unwrap();
        let xs = [0.1, 0.5, 0.99, 1.0, 2.0, 10.0];
        let mut prev = vec![0.0; xs.len()];
        for n in [2, 8, 32, 128] {
            let f = apply_k_weight(p, &ell_n(&m, 0.0, n).unwrap());
            for (i, &x) in xs.iter().enumerate() {
                let v = f.eval(x);
                assert!(v >= prev[i] - 1e-14 && v <= x.min(1.0) + 1e-14);
                prev[i] = v;
            }
        }
        assert!((prev[3] - 1.0).abs() < 1e-2);
    }

    #[test]
    fn sampled_cone_membership() {
        let p = ConeParams::omega();
        let s = sample_cone(p, 1, 1);
        assert!((s[0].eval(0.1) - s[0].eval(0.9)).abs() <= 1e-15 * s[0].eval(0.1));
        let pts = grid::geometric(1e-2, 1e5, 16);
        for f in sample_cone(p, 7, 20) {
            f.certify(&pts).unwrap();
        }
    }

    #[test]
    fn section_ratio_is_kernel_ratio() {
        let p = ConeParams::omega();
        let u = Weight::indicator(0.0, 1.0);
        let v = Weight::parse("t^-1 on(1,inf)").unwrap();
        let s = ConeElement::section(p, 4.0, 1.0).unwrap();
        let direct = s.norm(1.0, &u) / s.norm(0.5, &v);
        let k = kernel(2.0, 0.0, 4.0).unwrap();
        let exact = k.lebesgue_norm(1.0, &u).unwrap() / k.lebesgue_norm(0.5, &v).unwrap();
        assert_eq!(direct, exact);
    }
}
