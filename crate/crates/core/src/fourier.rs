//! Fourier coefficients of modulated step functions on the circle, their
//! rearrangements, and the test functions that make the weight conditions
//! necessary.
//!
//! The circle is `[0, 1)` with `ĝ(n) = ∫_0^1 e^{-2πinx} g(x) dx`. Coefficients
//! are computed in closed form for `|n| ≤ N`; omitted ones are controlled by
//! an explicit bound so every statement about `ĝ*` is either a rigorous lower
//! bound or a rigorous upper bound.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::averaging::AveragingOp;
use crate::error::{Error, Result};
use crate::quad::{integrate_log, REL_TOL};
use crate::stepfn::{DecreasingStep, Domain, StepFunction};
use crate::weight::Weight;

/// Jodeit–Torchinsky constant for the Fourier coefficient map.
pub const JT_CONSTANT: f64 = 8.0;
/// Test-function constant for `z ≥ 3`.
pub const C1: f64 = 183.0;
/// Test-function constant for `z ≥ 1`.
pub const C_ALL: f64 = 549.0;
/// Default truncation radius.
pub const DEFAULT_N: usize = 65536;
/// Relative slack allowed when comparing a coefficient with a promised bound.
pub const BOUND_RTOL: f64 = 1e-12;

/// `amp · e^{iθ} · e^{2πimx}` on `[x0, x1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub x0: f64,
    pub x1: f64,
    pub amp: f64,
    pub freq: i64,
    #[serde(default)]
    pub phase: f64,
}

impl Piece {
    pub fn new(x0: f64, x1: f64, amp: f64, freq: i64, phase: f64) -> Self {
        Self { x0, x1, amp, freq, phase }
    }

    pub fn coefficient(&self, n: i64) -> Complex64 {
        let len = self.x1 - self.x0;
        let d = (n - self.freq) as f64;
        let rot = Complex64::from_polar(self.amp, self.phase);
        if d == 0.0 {
            return rot * len;
        }
        let mag = (PI * d * len).sin() / (PI * d);
        rot * Complex64::from_polar(mag, -PI * d * (self.x0 + self.x1))
    }
}

/// A complex circle function built from disjoint modulated pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModulated")]
pub struct ModulatedStep {
    pieces: Vec<Piece>,
}

#[derive(Deserialize)]
struct RawModulated {
    pieces: Vec<Piece>,
}

impl TryFrom<RawModulated> for ModulatedStep {
    type Error = Error;
    fn try_from(r: RawModulated) -> Result<Self> {
        ModulatedStep::new(r.pieces)
    }
}

impl ModulatedStep {
    pub fn new(mut pieces: Vec<Piece>) -> Result<Self> {
        pieces.retain(|p| p.amp != 0.0);
        pieces.sort_by(|a, b| a.x0.partial_cmp(&b.x0).unwrap_or(std::cmp::Ordering::Equal));
        let mut end = 0.0;
        for p in &pieces {
            if !(p.x0 >= 0.0 && p.x1 > p.x0 && p.x1 <= 1.0) {
                return Err(Error::InvalidInput(format!("piece [{}, {}) is not inside [0, 1)", p.x0, p.x1)));
            }
            if !(p.amp > 0.0 && p.amp.is_finite()) || !p.phase.is_finite() {
                return Err(Error::InvalidInput("amplitudes must be positive and phases finite".into()));
            }
            if p.x0 < end {
                return Err(Error::InvalidInput("pieces overlap".into()));
            }
            end = p.x1;
        }
        Ok(Self { pieces })
    }

    /// `χ_{[a,b)}`.
    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![Piece::new(a, b, 1.0, 0, 0.0)])
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn l1_norm(&self) -> f64 {
        self.pieces.iter().map(|p| p.amp * (p.x1 - p.x0)).sum()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.pieces.iter().map(|p| p.amp * p.amp * (p.x1 - p.x0)).sum()
    }

    pub fn support_length(&self) -> f64 {
        self.pieces.iter().map(|p| p.x1 - p.x0).sum()
    }

    pub fn max_abs_freq(&self) -> u64 {
        self.pieces.iter().map(|p| p.freq.unsigned_abs()).max().unwrap_or(0)
    }

    /// Frequency range `(min, max)` of the pieces.
    pub fn freq_range(&self) -> (i64, i64) {
        let lo = self.pieces.iter().map(|p| p.freq).min().unwrap_or(0);
        let hi = self.pieces.iter().map(|p| p.freq).max().unwrap_or(0);
        (lo, hi)
    }

    pub fn coefficient(&self, n: i64) -> Complex64 {
        self.pieces.iter().map(|p| p.coefficient(n)).sum()
    }

    /// `|g|` as a step function on `[0, 1]`.
    pub fn modulus(&self) -> StepFunction {
        let iv: Vec<(f64, f64, f64)> = self.pieces.iter().map(|p| (p.x0, p.x1, p.amp)).collect();
        StepFunction::from_intervals(Domain::Unit, &iv).expect("validated pieces")
    }

    /// `g*`.
    pub fn rearrange(&self) -> DecreasingStep {
        self.modulus().rearrange().expect("bounded support")
    }

    /// `x ↦ g(x − dx)`; needs the shifted pieces to stay inside `[0, 1)`.
    pub fn shifted(&self, dx: f64) -> Result<Self> {
        Self::new(
            self.pieces
                .iter()
                .map(|p| Piece::new(p.x0 + dx, p.x1 + dx, p.amp, p.freq, p.phase - 2.0 * PI * p.freq as f64 * dx))
                .collect(),
        )
    }

    /// `x ↦ e^{2πimx} g(x)`.
    pub fn modulated(&self, m: i64) -> Self {
        Self { pieces: self.pieces.iter().map(|p| Piece { freq: p.freq + m, ..*p }).collect() }
    }
}

/// `|ĝ(n)|` for `|n| ≤ N` with a bound on every omitted coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub n_max: usize,
    /// `|ĝ(n)|` for `n = −N..=N`.
    pub values: Vec<f64>,
    /// Every `|ĝ(n)|` with `|n| > N` is at most this.
    pub truncation_bound: f64,
    /// Sum of the amplitudes.
    pub amplitude: f64,
    /// Largest `|m|` over the pieces.
    pub max_freq: u64,
}

/// Closed-form coefficient table; needs `N ≥ max |m|`.
pub fn coefficients(g: &ModulatedStep, n_max: usize) -> Result<CoefficientTable> {
    if n_max < 1 {
        return Err(Error::InvalidInput("truncation radius must be at least 1".into()));
    }
    let max_freq = g.max_abs_freq();
    if (n_max as u64) < max_freq {
        return Err(Error::InvalidInput(format!(
            "truncation radius {n_max} is below the largest piece frequency {max_freq}"
        )));
    }
    let n = n_max as i64;
    let values: Vec<f64> = (-n..=n).into_par_iter().map(|k| g.coefficient(k).norm()).collect();
    let truncation_bound = g
        .pieces
        .iter()
        .map(|p| p.amp / (PI * ((n_max as u64 + 1 - p.freq.unsigned_abs()) as f64)))
        .sum();
    let amplitude = g.pieces.iter().map(|p| p.amp).sum();
    Ok(CoefficientTable { n_max, values, truncation_bound, amplitude, max_freq })
}

impl CoefficientTable {
    pub fn get(&self, n: i64) -> Option<f64> {
        let i = n + self.n_max as i64;
        if i < 0 {
            return None;
        }
        self.values.get(i as usize).copied()
    }

    /// `Σ_{|n|≤N} |ĝ(n)|²`.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// `Σ_{|n|>N} |ĝ(n)|² ≤ 2 Σ_{k>N} (L/(π(k−M)))² ≤ 2L²/(π²(N−M))`.
    pub fn tail_energy_bound(&self) -> f64 {
        let gap = (self.n_max as u64 - self.max_freq) as f64;
        if gap == 0.0 {
            return f64::INFINITY;
        }
        2.0 * self.amplitude * self.amplitude / (PI * PI * gap)
    }
}

/// Rearranged coefficients with rigorous lower and upper envelopes for `ĝ*`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientRearrangement {
    sorted: Vec<f64>,
    prefix: Vec<f64>,
    /// Bound on each omitted coefficient.
    pub truncation_bound: f64,
    amplitude: f64,
    /// `N − max|m|`.
    gap: f64,
}

/// Sorts `|ĝ(n)|`, `|n| ≤ N`, into a decreasing sequence on `[j, j+1)`.
pub fn coeff_rearrangement(table: &CoefficientTable) -> CoefficientRearrangement {
    let mut sorted = table.values.clone();
    sorted.par_sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    let mut prefix = Vec::with_capacity(sorted.len() + 1);
    let mut s = 0.0;
    prefix.push(0.0);
    for v in &sorted {
        s += v;
        prefix.push(s);
    }
    let gap = (table.n_max as u64 - table.max_freq) as f64 + 1.0;
    CoefficientRearrangement {
        sorted,
        prefix,
        truncation_bound: table.amplitude / (PI * gap),
        amplitude: table.amplitude,
        gap,
    }
}

impl CoefficientRearrangement {
    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// A lower bound on `ĝ*(y)`: the rearrangement of the kept coefficients.
    pub fn lower(&self, y: f64) -> f64 {
        if y < 0.0 {
            return f64::NAN;
        }
        self.sorted.get(y.floor() as usize).copied().unwrap_or(0.0)
    }

    /// An upper bound on `ĝ*(y)`.
    pub fn upper(&self, y: f64) -> f64 {
        let b = self.truncation_bound;
        let kept = self.sorted.len() as f64;
        if y < kept {
            return self.lower(y).max(b);
        }
        b.min(self.tail_bound(y))
    }

    /// For `y ≥ 2N+1`: `ĝ*(y) ≤ 2L/(π(y − 1 − 2M))`.
    fn tail_bound(&self, y: f64) -> f64 {
        let m2 = self.sorted.len() as f64 - 2.0 * self.gap + 1.0; // 2M
        let d = y - 1.0 - m2;
        if d <= 0.0 {
            f64::INFINITY
        } else {
            2.0 * self.amplitude / (PI * d)
        }
    }

    /// Whether a lower bound at level `value` is certified at this `N`.
    pub fn verifiable(&self, value: f64) -> bool {
        value >= 2.0 * self.truncation_bound
    }

    /// The kept coefficients as a decreasing step function.
    pub fn lower_step(&self) -> DecreasingStep {
        step_from_sorted(&self.sorted)
    }

    /// `max(kept*, B)` on the table range.
    fn upper_step(&self) -> DecreasingStep {
        let b = self.truncation_bound;
        let v: Vec<f64> = self.sorted.iter().map(|x| x.max(b)).collect();
        step_from_sorted(&v)
    }

    /// `∫_0^t ĝ*` bounds.
    pub fn integral_bounds(&self, t: f64) -> (f64, f64) {
        let lo = self.kept_integral(t);
        (lo, lo + self.tail_integral_bound(t))
    }

    fn kept_integral(&self, t: f64) -> f64 {
        let n = self.sorted.len();
        let j = (t.floor() as usize).min(n);
        let mut s = self.prefix[j];
        if j < n {
            s += self.sorted[j] * (t - j as f64);
        }
        s
    }

    /// Largest possible mass of `t` omitted coefficients.
    fn tail_integral_bound(&self, t: f64) -> f64 {
        let log_form = 2.0 * self.amplitude / PI * (1.0 + (t / 2.0 + 1.0) / (self.gap - 1.0).max(1.0)).ln();
        (t * self.truncation_bound).min(log_form)
    }

    /// Bounds on `∫ (ĝ*)^q u`.
    pub fn lambda_bounds(&self, q: f64, u: &Weight) -> Result<(f64, f64)> {
        let lo = self.lower_step().as_step().weighted_integral(u, q)?;
        let mut hi = self.upper_step().as_step().weighted_integral(u, q)?;
        let start = self.sorted.len() as f64;
        for t in u.terms() {
            let a = t.lo.max(start);
            if t.hi > a {
                hi += integrate_log(|y| self.upper(y).powf(q) * t.f.eval(y), a, t.hi, REL_TOL);
            }
        }
        Ok((lo, hi))
    }

    /// Bounds on `‖ĝ‖_{Γ_q(u)}` (norms, not powers).
    pub fn gamma_bounds(&self, q: f64, u: &Weight) -> (f64, f64) {
        let lo = crate::norms::gamma_integral(&self.lower_step(), q, u);
        let tail = |t: f64| self.tail_integral_bound(t) / t;
        let mut extra = 0.0;
        for term in u.terms() {
            extra += integrate_log(|t| tail(t).powf(q) * term.f.eval(t), term.lo, term.hi, REL_TOL);
        }
        let hi = if q >= 1.0 { lo.powf(1.0 / q) + extra.powf(1.0 / q) } else { (lo + extra).powf(1.0 / q) };
        (lo.powf(1.0 / q), hi)
    }
}

fn step_from_sorted(v: &[f64]) -> DecreasingStep {
    let n = v.iter().rposition(|&x| x > 0.0).map_or(0, |i| i + 1);
    let bps: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    DecreasingStep::new(StepFunction::new(bps, v[..n].to_vec(), None, Domain::Halfline).expect("valid cells"))
        .expect("sorted values")
}

/// One line of a Jodeit–Torchinsky check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JtLine {
    pub z: f64,
    /// Upper bound on `∫_0^z (ĝ**)²`.
    pub lhs: f64,
    /// `∫_0^z (∫_0^{1/t} g*)² dt`.
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JtReport {
    pub n_max: usize,
    pub truncation_bound: f64,
    pub lines: Vec<JtLine>,
    pub max_ratio: f64,
    pub constant: f64,
    pub holds: bool,
    /// Set when the truncation bound is not below 1% of `ĝ**(z_max)`.
    pub coarse_truncation: bool,
}

/// `∫_0^z (ĝ**)² dt ≤ 8 ∫_0^z (∫_0^{1/t} g*)² dt` on a set of `z`.
pub fn jt_check(g: &ModulatedStep, zs: &[f64], n_max: usize) -> Result<JtReport> {
    if zs.iter().any(|&z| !(z > 0.0) || !z.is_finite()) {
        return Err(Error::InvalidInput("z values must be positive and finite".into()));
    }
    let table = coefficients(g, n_max)?;
    let rear = coeff_rearrangement(&table);
    let up = rear.upper_step();
    let gstar = g.rearrange();
    let lines: Vec<JtLine> = zs
        .par_iter()
        .map(|&z| {
            let lhs = crate::norms::gamma_integral(&up, 2.0, &Weight::indicator(0.0, z));
            let rhs = jt_rhs(&gstar, z);
            JtLine { z, lhs, rhs, ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 } }
        })
        .collect();
    let max_ratio = lines.iter().map(|l| l.ratio).fold(0.0, f64::max);
    let zmax = zs.iter().cloned().fold(0.0, f64::max);
    let coarse = zmax > 0.0 && rear.truncation_bound >= 0.01 * rear.kept_integral(zmax) / zmax;
    Ok(JtReport {
        n_max,
        truncation_bound: rear.truncation_bound,
        lines,
        max_ratio,
        constant: JT_CONSTANT,
        holds: max_ratio <= JT_CONSTANT,
        coarse_truncation: coarse,
    })
}

/// [`jt_check`] starting at `n_max` and doubling it, up to `n_cap`, while the
/// truncation is coarse.
pub fn jt_check_refined(g: &ModulatedStep, zs: &[f64], n_max: usize, n_cap: usize) -> Result<JtReport> {
    let mut n = n_max;
    loop {
        let r = jt_check(g, zs, n)?;
        if !r.coarse_truncation || n * 2 > n_cap {
            return Ok(r);
        }
        n *= 2;
    }
}

/// `∫_0^z F(1/t)² dt = ∫_{1/z}^∞ F(s)² s^{-2} ds` with `F(s) = ∫_0^s g*`.
pub fn jt_rhs(gstar: &DecreasingStep, z: f64) -> f64 {
    let s0 = 1.0 / z;
    let f = gstar.as_step();
    let mut total = 0.0;
    let mut acc = 0.0;
    for (lo, hi, v) in f.cells() {
        // F = acc + v (s − lo) = a + v s on the cell
        let a = acc - v * lo;
        let (l, h) = (lo.max(s0), hi);
        if h > l {
            total += a * a * (1.0 / l - 1.0 / h) + 2.0 * a * v * (h / l).ln() + v * v * (h - l);
        }
        acc += v * (hi - lo);
    }
    total + acc * acc / f.end().max(s0)
}

/// A test function with the lower bound it is built to satisfy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub g: ModulatedStep,
    pub bound: Bound,
}

/// Lower bounds on `ĝ*(y)` promised by the constructions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bound {
    /// `1 / (3πy + 9πz)`.
    Basic { z: f64 },
    /// `f̂*(y/k) − ε` with `f = χ_{[0, 1/(kz))}`.
    Dilated { k: u32, z: f64, eps: f64 },
    /// `1 / (3πy/r + 9π(r+1)z) − ε`.
    Combined { z: f64, r: f64, eps: f64 },
    /// `f̂_j*(y) − ε` for every component `f_j`.
    Assembled { lengths: Vec<f64>, eps: f64 },
    /// `(A ω_z(y))^{1/2} / c − ε`.
    Averaged { z: f64, op: AveragingOp, c: f64, eps: f64 },
}

/// `χ_{[0, 1/z)}` for `z ≥ 3`.
pub fn testfun_basic(z: f64) -> Result<TestFunction> {
    if !(z >= 3.0) || !z.is_finite() {
        return Err(Error::Hypothesis(format!("the basic estimate needs z ≥ 3, got {z}")));
    }
    Ok(TestFunction { g: ModulatedStep::indicator(0.0, 1.0 / z)?, bound: Bound::Basic { z } })
}

/// `Σ_{j<k} e^{2πijMx} χ_{[0,1/(kz))}(x − j/(kz))` with `M = ⌈2k/(πε)⌉`.
pub fn testfun_dilated(k: u32, z: f64, eps: f64) -> Result<TestFunction> {
    if k == 0 || !(z > 1.0) || !z.is_finite() || !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("need k ≥ 1, z > 1, ε > 0; got k = {k}, z = {z}, ε = {eps}")));
    }
    let kz = k as f64 * z;
    if k as f64 / kz > 1.0 {
        return Err(Error::InvalidInput("translates do not fit in [0, 1)".into()));
    }
    let m = if k == 1 { 0 } else { (2.0 * k as f64 / (PI * eps)).ceil() as i64 };
    let pieces = (0..k)
        .map(|j| {
            let x0 = j as f64 / kz;
            let x1 = ((j + 1) as f64 / kz).min(1.0);
            let freq = j as i64 * m;
            // e^{2πi jM x} on the shifted copy, no extra phase
            Piece::new(x0, x1, 1.0, freq, 0.0)
        })
        .collect();
    Ok(TestFunction { g: ModulatedStep::new(pieces)?, bound: Bound::Dilated { k, z, eps } })
}

/// The dilated construction with `r ≤ k < r + 1`.
pub fn testfun_combined(z: f64, r: f64, eps: f64) -> Result<TestFunction> {
    if !(z >= 3.0) || !(r > 0.0) || !r.is_finite() {
        return Err(Error::Hypothesis(format!("the combined estimate needs z ≥ 3 and r > 0, got z = {z}, r = {r}")));
    }
    let k = r.ceil().max(1.0) as u32;
    let t = testfun_dilated(k, z, eps)?;
    Ok(TestFunction { g: t.g, bound: Bound::Combined { z, r, eps } })
}

/// Places `components` side by side from `x = 0` with frequency offsets so
/// that their spectra sit in disjoint windows, each component `j` leaking at
/// most `ε/2^{j+1}` outside its own window.
pub fn assemble(components: &[ModulatedStep], eps: f64) -> Result<ModulatedStep> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput("ε must be positive".into()));
    }
    let total: f64 = components.iter().map(|c| c.pieces.last().map_or(0.0, |p| p.x1)).sum();
    if total > 1.0 + 1e-12 {
        return Err(Error::InvalidInput(format!("components need total length ≤ 1, got {total}")));
    }
    let mut pieces = Vec::new();
    let mut x = 0.0;
    let mut prev_edge: Option<f64> = None;
    for (j, c) in components.iter().enumerate() {
        let amp: f64 = c.pieces.iter().map(|p| p.amp).sum();
        let half = amp * 2f64.powi(j as i32 + 1) / (PI * eps);
        let (lo, hi) = c.freq_range();
        let offset = match prev_edge {
            None => 0,
            Some(edge) => (edge + half - lo as f64 + 1.0).ceil() as i64,
        };
        prev_edge = Some((offset + hi) as f64 + half);
        for p in &c.pieces {
            pieces.push(Piece::new(
                p.x0 + x,
                (p.x1 + x).min(1.0),
                p.amp,
                p.freq + offset,
                p.phase - 2.0 * PI * p.freq as f64 * x,
            ));
        }
        x += c.pieces.last().map_or(0.0, |p| p.x1);
    }
    ModulatedStep::new(pieces)
}

/// `χ_{[0,p_j)}` components assembled with disjoint frequency windows.
pub fn testfun_assembled(lengths: &[f64], eps: f64) -> Result<TestFunction> {
    if lengths.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::InvalidInput("lengths must be positive".into()));
    }
    let comps: Vec<ModulatedStep> =
        lengths.iter().map(|&p| ModulatedStep::indicator(0.0, p)).collect::<Result<_>>()?;
    let g = assemble(&comps, eps)?;
    Ok(TestFunction { g, bound: Bound::Assembled { lengths: lengths.to_vec(), eps } })
}

/// Parameters of one component of the full construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub role: String,
    pub length: f64,
    pub interval: Option<(f64, f64)>,
    pub r: Option<f64>,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullTestFunction {
    pub test: TestFunction,
    /// The `z` the construction was run at (`max(z, 3)`).
    pub z_built: f64,
    pub components: Vec<Component>,
}

/// Test function with `f* ≤ χ_{[0,1/z)}` and `(Aω_z)^{1/2} ≤ c(f̂* + ε)`,
/// `c = 183` for `z ≥ 3` and `549` for `1 ≤ z < 3`.
pub fn testfun_full(z: f64, op: &AveragingOp, eps: f64) -> Result<FullTestFunction> {
    if !(z >= 1.0) || !z.is_finite() {
        return Err(Error::Hypothesis(format!("the construction needs z ≥ 1, got {z}")));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidInput("ε must be positive".into()));
    }
    let zb = z.max(3.0);
    let c = if z >= 3.0 { C1 } else { C_ALL };
    let half = eps / 2.0;
    let mut comps = vec![ModulatedStep::indicator(0.0, 1.0 / (4.0 * zb))?];
    let mut info = vec![Component { role: "base".into(), length: 1.0 / (4.0 * zb), interval: None, r: None, z: 4.0 * zb }];
    let home = op.intervals().iter().copied().find(|&(a, b)| a < zb && zb < b);
    if let Some((a0, b0)) = home {
        let r = (b0 / (8.0 * zb)).sqrt();
        let zz = 8.0 * zb / 3.0;
        comps.push(testfun_combined(zz, r, half)?.g);
        info.push(Component { role: "home".into(), length: 3.0 / (8.0 * zb), interval: Some((a0, b0)), r: Some(r), z: zz });
    }
    for &(a, b) in op.intervals() {
        if Some((a, b)) == home || !(zb <= a && a <= b / 2.0) {
            continue;
        }
        let r = (b / (16.0 * a)).sqrt();
        let zz = 16.0 * a / 3.0;
        comps.push(testfun_combined(zz, r, half)?.g);
        info.push(Component { role: "far".into(), length: 3.0 / (16.0 * a), interval: Some((a, b)), r: Some(r), z: zz });
    }
    let total: f64 = info.iter().map(|c| c.length).sum();
    if total > 1.0 / zb + 1e-12 {
        return Err(Error::Internal(format!("length budget exceeded: {total} > 1/{zb}")));
    }
    let g = assemble(&comps, half)?;
    Ok(FullTestFunction {
        test: TestFunction { g, bound: Bound::Averaged { z, op: op.clone(), c, eps } },
        z_built: zb,
        components: info,
    })
}

/// `(A ω_z)(y)` evaluated exactly.
pub fn averaged_omega(op: &AveragingOp, z: f64, y: f64) -> f64 {
    let w = Weight::omega(z);
    match op.interval_of(y) {
        Some((a, b)) => w.integral(a, b) / (b - a),
        None => w.eval(y),
    }
}

/// Outcome of checking a test function against its promised bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub n_max: usize,
    pub truncation_bound: f64,
    /// Integer `y` checked, `0..=y_max`.
    pub y_max: u64,
    /// First `y` where the promised bound is below `2 × truncation bound`.
    pub unverifiable_from: Option<u64>,
    pub holds: bool,
    /// `min_y (ĝ*(y) − bound(y))` over the certified range.
    pub worst_margin: f64,
    pub worst_y: u64,
    /// `|g| ≤ ` the promised rearrangement ceiling.
    pub rearrangement_ok: bool,
}

/// Checks `ĝ*(y) ≥ bound(y)` at integers `0 ≤ y ≤ y_max` using the kept
/// coefficients, a lower bound for `ĝ*`. Cells are `[y, y+1)` and every
/// promised bound is non-increasing, so the integers cover the whole range.
pub fn check_bound(t: &TestFunction, y_max: u64, n_max: usize) -> Result<BoundCheck> {
    let n_max = n_max.max(2 * t.g.max_abs_freq() as usize);
    let table = coefficients(&t.g, n_max)?;
    let rear = coeff_rearrangement(&table);
    let reference = reference_rearrangements(&t.bound, n_max)?;
    let bound = |y: f64| promised(&t.bound, &reference, y);
    let mut holds = true;
    let mut worst = f64::INFINITY;
    let mut worst_y = 0;
    let mut unverifiable = None;
    for y in 0..=y_max {
        let b = bound(y as f64);
        if !rear.verifiable(b) && b > 0.0 {
            if unverifiable.is_none() {
                unverifiable = Some(y);
            }
            continue;
        }
        if b <= 0.0 {
            continue;
        }
        let m = rear.lower(y as f64) - b;
        if m < worst {
            worst = m;
            worst_y = y;
        }
        if m < -BOUND_RTOL * b {
            holds = false;
        }
    }
    let rearrangement_ok = rearrangement_ceiling_ok(t);
    Ok(BoundCheck {
        n_max,
        truncation_bound: rear.truncation_bound,
        y_max,
        unverifiable_from: unverifiable,
        holds,
        worst_margin: worst,
        worst_y,
        rearrangement_ok,
    })
}

fn rearrangement_ceiling_ok(t: &TestFunction) -> bool {
    let gs = t.g.rearrange();
    let (ceiling, exact) = match &t.bound {
        Bound::Basic { z } => (1.0 / z, true),
        Bound::Dilated { z, .. } | Bound::Combined { z, .. } => (1.0 / z, true),
        Bound::Assembled { lengths, .. } => (lengths.iter().sum(), true),
        Bound::Averaged { z, .. } => (1.0 / z, false),
    };
    let f = gs.as_step();
    let tol = 1e-12;
    let values_ok = f.values().iter().all(|&v| v <= 1.0 + tol);
    let end = f.end();
    if exact {
        values_ok && (end - ceiling).abs() <= tol && f.values().iter().all(|&v| (v - 1.0).abs() <= tol)
    } else {
        values_ok && end <= ceiling + tol
    }
}

/// Upper envelopes of the reference rearrangements a bound refers to.
fn reference_rearrangements(b: &Bound, n_max: usize) -> Result<Vec<CoefficientRearrangement>> {
    let refs: Vec<ModulatedStep> = match b {
        Bound::Dilated { k, z, .. } => vec![ModulatedStep::indicator(0.0, 1.0 / (*k as f64 * z))?],
        Bound::Assembled { lengths, .. } => {
            lengths.iter().map(|&p| ModulatedStep::indicator(0.0, p)).collect::<Result<_>>()?
        }
        _ => Vec::new(),
    };
    refs.iter().map(|g| Ok(coeff_rearrangement(&coefficients(g, n_max)?))).collect()
}

fn promised(b: &Bound, refs: &[CoefficientRearrangement], y: f64) -> f64 {
    match b {
        Bound::Basic { z } => 1.0 / (3.0 * PI * y + 9.0 * PI * z),
        Bound::Dilated { k, eps, .. } => refs[0].upper((y / *k as f64).floor()) - eps,
        Bound::Combined { z, r, eps } => 1.0 / (3.0 * PI * y / r + 9.0 * PI * (r + 1.0) * z) - eps,
        Bound::Assembled { eps, .. } => refs.iter().map(|r| r.upper(y)).fold(0.0, f64::max) - eps,
        Bound::Averaged { z, op, c, eps } => averaged_omega(op, *z, y).sqrt() / c - eps,
    }
}

/// Which Fourier inequality a ratio refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InequalityKind {
    /// `‖ĝ‖_{Γ_q(u)} ≤ C ‖g‖_{Γ_p(w)}`.
    GammaGamma,
    /// `‖ĝ‖_{Λ_q(u)} ≤ C ‖g‖_{Γ_p(w)}`.
    GammaLambda,
    /// `‖ĝ‖_{Λ_q(u)} ≤ C ‖g‖_{Λ_p(w)}`.
    LambdaLambda,
}

impl std::str::FromStr for InequalityKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma-gamma" => Ok(Self::GammaGamma),
            "gamma-lambda" => Ok(Self::GammaLambda),
            "lambda-lambda" => Ok(Self::LambdaLambda),
            _ => Err(Error::InvalidInput(format!("unknown inequality '{s}'"))),
        }
    }
}

/// Bounds on `‖ĝ‖ / ‖g‖` for one function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRecord {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(with = "crate::serde_ext::extended_f64")]
    pub lower: f64,
    #[serde(with = "crate::serde_ext::extended_f64")]
    pub upper: f64,
}

/// Bounds on the inequality ratio for `g`.
pub fn fourier_ratio(
    g: &ModulatedStep,
    kind: InequalityKind,
    u: &Weight,
    w: &Weight,
    p: f64,
    q: f64,
    n_max: usize,
) -> Result<(f64, f64)> {
    let n_max = n_max.max(2 * g.max_abs_freq() as usize);
    let rear = coeff_rearrangement(&coefficients(g, n_max)?);
    let (num_lo, num_hi) = match kind {
        InequalityKind::GammaGamma => rear.gamma_bounds(q, u),
        _ => {
            let (a, b) = rear.lambda_bounds(q, u)?;
            (a.powf(1.0 / q), b.powf(1.0 / q))
        }
    };
    let gs = g.rearrange();
    let den = match kind {
        InequalityKind::LambdaLambda => crate::norms::lambda_norm_decreasing(&gs, p, w)?.value,
        _ => crate::norms::gamma_norm_decreasing(&gs, p, w)?.value,
    };
    if den == 0.0 {
        return Err(Error::InvalidInput("test function has zero norm".into()));
    }
    Ok((num_lo / den, num_hi / den))
}

/// Which functions to feed the verifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suite {
    /// Number of seeded random modulated steps.
    pub random: usize,
    pub seed: u64,
    /// `z` values for the test-function family; empty disables it.
    pub adversarial_z: Vec<f64>,
    pub eps: f64,
}

impl Default for Suite {
    fn default() -> Self {
        Self { random: 100, seed: 0, adversarial_z: Vec::new(), eps: 1e-3 }
    }
}

impl Suite {
    /// `z = 4, 8, …, 256`.
    pub fn dyadic_z() -> Vec<f64> {
        (2..=8).map(|k| 2f64.powi(k)).collect()
    }

    /// Parses `random:100+adversarial`, `adversarial`, `random:20`.
    pub fn parse(text: &str, seed: u64) -> Result<Self> {
        let mut s = Suite { random: 0, seed, adversarial_z: Vec::new(), eps: 1e-3 };
        for part in text.split('+').map(str::trim) {
            if part == "adversarial" {
                s.adversarial_z = Self::dyadic_z();
            } else if part == "random" {
                s.random = 100;
            } else if let Some(n) = part.strip_prefix("random:") {
                s.random = n.parse().map_err(|_| Error::InvalidInput(format!("bad suite count '{n}'")))?;
            } else {
                return Err(Error::InvalidInput(format!("unknown suite part '{part}'")));
            }
        }
        Ok(s)
    }
}

/// Averaging families the adversarial suite tries at each `z`.
pub fn adversarial_families(z: f64) -> Vec<(String, AveragingOp)> {
    let zb = z.max(3.0);
    let home = (z / 2.0, 4.0 * z);
    let far: Vec<(f64, f64)> = (0..4).map(|i| (zb * 8f64.powi(i), 4.0 * zb * 8f64.powi(i))).collect();
    let mut both = vec![home];
    both.extend(far.iter().skip(1).copied());
    [
        ("identity", Vec::new()),
        ("home", vec![home]),
        ("far", far),
        ("home+far", both),
    ]
    .into_iter()
    .map(|(n, iv)| (n.to_string(), AveragingOp::new(iv).expect("disjoint families")))
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarialLine {
    pub z: f64,
    pub family: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub kind: InequalityKind,
    pub p: f64,
    pub q: f64,
    pub u: String,
    pub w: String,
    pub n_max: usize,
    pub suite: Suite,
    /// The condition the ceiling and floor come from, if the indices allow one.
    pub condition: Option<crate::conditions::ConditionReport>,
    #[serde(with = "crate::serde_ext::extended_f64_opt", default)]
    pub ceiling: Option<f64>,
    #[serde(with = "crate::serde_ext::extended_f64_opt", default)]
    pub floor: Option<f64>,
    pub records: Vec<RatioRecord>,
    /// Largest certified lower bound on a ratio.
    pub max_lower: f64,
    /// Largest upper bound on a ratio.
    pub max_upper: f64,
    /// Per `z`, the best family.
    pub adversarial: Vec<AdversarialLine>,
    /// `floor / max_lower` when a floor exists.
    #[serde(with = "crate::serde_ext::extended_f64_opt", default)]
    pub slack: Option<f64>,
    pub within_ceiling: bool,
    /// The condition is finite (or no condition applies).
    pub bounded: bool,
}

/// Empirical Fourier-inequality ratios over a suite, set against the
/// two-sided bounds from `C_xy` (for `q = 2`, `p ≤ 2`) or `C_ω` (for `q ≥ 2`).
pub fn verify_inequality(
    u: &Weight,
    w: &Weight,
    p: f64,
    q: f64,
    kind: InequalityKind,
    suite: &Suite,
    n_max: usize,
    grid: &crate::grid::Grid,
) -> Result<VerifyReport> {
    use crate::conditions::{c_omega, c_xy};
    if !(p > 0.0 && q > 0.0) {
        return Err(Error::InvalidInput("p and q must be positive".into()));
    }
    let (condition, ceiling, floor) = if q == 2.0 && p <= 2.0 {
        let c = c_xy(u, w, p, grid)?;
        let v = c.estimate();
        (Some(c), Some(JT_CONSTANT * v), Some(v / C_ALL))
    } else if q >= 2.0 {
        let c = c_omega(u, w, p, q, grid)?;
        let hi = c.upper.or(c.value).unwrap_or(f64::NAN);
        let lo = c.lower.or(c.value).unwrap_or(f64::NAN);
        (Some(c), Some(4.0 * hi.sqrt()), Some(lo.sqrt() / C_ALL))
    } else {
        (None, None, None)
    };
    // Λ_p ≤ Γ_p, so the ceiling says nothing about a Λ denominator.
    let ceiling = if kind == InequalityKind::LambdaLambda { None } else { ceiling };
    let bounded = condition.as_ref().map_or(true, |c| !c.is_infinite());

    let mut jobs: Vec<(String, Option<f64>, Option<String>, ModulatedStep)> = crate::sample::modulated_steps(suite.seed, suite.random)
        .into_iter()
        .enumerate()
        .map(|(i, g)| (format!("random-{i}"), None, None, g))
        .collect();
    for &z in &suite.adversarial_z {
        for (name, op) in adversarial_families(z) {
            let g = testfun_full(z, &op, suite.eps)?.test.g;
            jobs.push((format!("testfun z={z} {name}"), Some(z), Some(name), g));
        }
    }
    let computed: Vec<Result<(RatioRecord, Option<String>)>> = jobs
        .into_par_iter()
        .map(|(label, z, fam, g)| {
            let (lower, upper) = fourier_ratio(&g, kind, u, w, p, q, n_max)?;
            Ok((RatioRecord { label, z, lower, upper }, fam))
        })
        .collect();
    let mut records = Vec::new();
    let mut adversarial: Vec<AdversarialLine> = Vec::new();
    for c in computed {
        let (rec, fam) = c?;
        if let (Some(z), Some(f)) = (rec.z, fam) {
            match adversarial.iter_mut().find(|l| l.z == z) {
                Some(l) if l.lower >= rec.lower => {}
                Some(l) => *l = AdversarialLine { z, family: f, lower: rec.lower, upper: rec.upper },
                None => adversarial.push(AdversarialLine { z, family: f, lower: rec.lower, upper: rec.upper }),
            }
        }
        records.push(rec);
    }
    let max_lower = records.iter().map(|r| r.lower).fold(0.0, f64::max);
    let max_upper = records.iter().map(|r| r.upper).fold(0.0, f64::max);
    let within_ceiling = ceiling.map_or(true, |c| max_lower <= c);
    let slack = floor.filter(|_| max_lower > 0.0).map(|f| f / max_lower);
    Ok(VerifyReport {
        kind,
        p,
        q,
        u: u.to_string(),
        w: w.to_string(),
        n_max,
        suite: suite.clone(),
        condition,
        ceiling,
        floor,
        records,
        max_lower,
        max_upper,
        adversarial,
        slack,
        within_ceiling,
        bounded,
    })
}
