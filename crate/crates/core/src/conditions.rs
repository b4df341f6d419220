//! Weight conditions for Fourier coefficient inequalities between Lorentz spaces.
//!
//! Every evaluator sweeps a geometric grid (see [`grid::sup_1d`]) and returns a
//! [`ConditionReport`]. Grid suprema never overshoot, so a reported value is a
//! lower bound on the true supremum unless the report says otherwise.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::grid::{self, Grid, SupResult, Verdict};
use crate::level::level_weight;
use crate::norms::{sup_average_from, BoundKind, GridMeta};
use crate::powerlog::PowerLog;
use crate::serde_ext::extended_f64_opt;
use crate::weight::{Term, Weight};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub name: String,
    pub params: serde_json::Value,
    #[serde(with = "extended_f64_opt", default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(with = "extended_f64_opt", default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(with = "extended_f64_opt", default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    pub kind: BoundKind,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<GridMeta>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ConditionReport {
    fn from_sup(name: &str, params: serde_json::Value, grid: &Grid, r: SupResult) -> Self {
        let value = if r.verdict == Verdict::Infinite { f64::INFINITY } else { r.value };
        Self {
            name: name.to_string(),
            params,
            value: Some(value),
            lower: None,
            upper: None,
            kind: BoundKind::Lower,
            verdict: r.verdict,
            grid: vec![GridMeta::from_sup(grid, &r)],
            notes: Vec::new(),
        }
    }

    /// Best single number: the value, or the lower bound of a bracket.
    pub fn estimate(&self) -> f64 {
        self.value.or(self.lower).unwrap_or(f64::NAN)
    }

    pub fn is_infinite(&self) -> bool {
        self.verdict == Verdict::Infinite
    }
}

/// `v(t) = t^{p−2} w(1/t)`.
pub fn dual_weight(w: &Weight, p: f64) -> Weight {
    w.dual(p)
}

/// `min(z^{-r}, t^{-r})` integrated against `w`: `z^{-r}∫_0^z w + ∫_z^∞ w t^{-r}`.
fn kernel_integral(w: &Weight, r: f64, z: f64) -> f64 {
    z.powf(-r) * w.integral(0.0, z) + w.moment(-r, z, f64::INFINITY)
}

/// `‖ω_z‖_{e,w}` with `ω_z = min(z^{-2}, t^{-2})`.
pub fn omega_norm(w: &Weight, e: f64, z: f64) -> f64 {
    let i = kernel_integral(w, 2.0 * e, z);
    if i == f64::INFINITY {
        i
    } else {
        i.powf(1.0 / e)
    }
}

/// `x^{-p}∫_0^x w + ∫_x^∞ w t^{-p}`.
pub fn hardy_denominator(w: &Weight, p: f64, x: f64) -> f64 {
    x.powf(-p) * w.integral(0.0, x) + w.moment(-p, x, f64::INFINITY)
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 || num == f64::INFINITY {
        f64::INFINITY
    } else if den == f64::INFINITY {
        0.0
    } else {
        num / den
    }
}

fn check_pos(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")))
    }
}

fn z_extra(u: &Weight, w: &Weight) -> Vec<f64> {
    let mut e: Vec<f64> = u.breakpoints();
    e.extend(w.breakpoints().into_iter().filter(|&b| b > 0.0).map(|b| 1.0 / b));
    e.retain(|&z| z > 1.0 && z.is_finite());
    e
}

fn x_extra(u: &Weight, w: &Weight) -> Vec<f64> {
    let mut e: Vec<f64> = w.breakpoints();
    e.extend(u.breakpoints().into_iter().filter(|&b| b > 0.0).map(|b| 1.0 / b));
    e.retain(|&x| x > 0.0 && x < 1.0);
    e.push(1.0);
    e
}

/// `C_ω = sup_{z>1} ‖ω_z‖_{Θ_{q/2}(u)} / ‖ω_z‖_{p/2,v}`.
///
/// At `q = 2` the numerator is `‖ω_z‖_{1,u°}` exactly. For `q > 2` the report
/// brackets the supremum between the identity-operator ratio and the
/// level-function ratio.
pub fn c_omega(u: &Weight, w: &Weight, p: f64, q: f64, grid: &Grid) -> Result<ConditionReport> {
    check_pos("p", p)?;
    check_pos("q", q)?;
    if q < 2.0 {
        return Err(Error::Hypothesis(format!("C_ω needs q ≥ 2, got q = {q}")));
    }
    let v = dual_weight(w, p);
    let level = level_weight(u)?.density;
    let params = json!({"u": u.to_string(), "w": w.to_string(), "p": p, "q": q});
    let extra = z_extra(u, w);
    let sweep = |num_w: &Weight| {
        let f = |z: f64| ratio(omega_norm(num_w, q / 2.0, z), omega_norm(&v, p / 2.0, z));
        grid::sup_1d(f, 1.0, f64::INFINITY, grid, &extra)
    };
    let up = sweep(&level);
    if q == 2.0 {
        let mut r = ConditionReport::from_sup("c_omega", params, grid, up);
        r.kind = BoundKind::Lower;
        return Ok(r);
    }
    let lo = sweep(u);
    let lower = if lo.verdict == Verdict::Infinite { f64::INFINITY } else { lo.value };
    let upper = if up.verdict == Verdict::Infinite { f64::INFINITY } else { up.value };
    let verdict = if lo.verdict == Verdict::Infinite {
        Verdict::Infinite
    } else if up.verdict == Verdict::Finite {
        Verdict::Finite
    } else {
        Verdict::Undecided
    };
    Ok(ConditionReport {
        name: "c_omega".into(),
        params,
        value: None,
        lower: Some(lower),
        upper: Some(upper),
        kind: BoundKind::Lower,
        verdict,
        grid: vec![GridMeta::from_sup(grid, &lo), GridMeta::from_sup(grid, &up)],
        notes: vec!["lower: identity operator; upper: level function of u".into()],
    })
}

/// `C_xy = sup_{1<1/x<y} ((1/(xy))∫_0^y u)^{1/2} (x^{-p}∫_0^x w + ∫_x^∞ w t^{-p})^{-1/p}`.
///
/// The inner supremum over `y` is taken exactly from the breakpoints of `u`.
pub fn c_xy(u: &Weight, w: &Weight, p: f64, grid: &Grid) -> Result<ConditionReport> {
    check_pos("p", p)?;
    if p > 2.0 {
        return Err(Error::Hypothesis(format!("C_xy needs 0 < p ≤ 2, got p = {p}")));
    }
    let f = |x: f64| {
        let m = sup_average_from(u, 1.0 / x) / x;
        let d = hardy_denominator(w, p, x);
        ratio(m.sqrt(), d.powf(1.0 / p))
    };
    let r = grid::sup_1d(f, 0.0, 1.0, grid, &x_extra(u, w));
    Ok(ConditionReport::from_sup("c_xy", json!({"u": u.to_string(), "w": w.to_string(), "p": p}), grid, r))
}

/// `sup_{0<x<1} (∫_0^{1/x} u)^{1/q} (x^{-p}∫_0^x w + ∫_x^∞ w t^{-p})^{-1/p}`.
pub fn nolevel_condition(u: &Weight, w: &Weight, p: f64, q: f64, grid: &Grid) -> Result<ConditionReport> {
    check_pos("p", p)?;
    check_pos("q", q)?;
    let f = |x: f64| ratio(u.integral(0.0, 1.0 / x).powf(1.0 / q), hardy_denominator(w, p, x).powf(1.0 / p));
    let r = grid::sup_1d(f, 0.0, 1.0, grid, &x_extra(u, w));
    let mut rep = ConditionReport::from_sup("nolevel", json!({"u": u.to_string(), "w": w.to_string(), "p": p, "q": q}), grid, r);
    if p > q || q < 2.0 {
        rep.notes.push("equivalence with boundedness needs p ≤ q and q ≥ 2".into());
    }
    Ok(rep)
}

/// `sup_{0<x<1} x (∫_0^{1/x} u)^{1/q} (∫_0^x w)^{-1/p}`.
pub fn bhc_condition(u: &Weight, w: &Weight, p: f64, q: f64, grid: &Grid) -> Result<ConditionReport> {
    check_pos("p", p)?;
    check_pos("q", q)?;
    let f = |x: f64| x * ratio(u.integral(0.0, 1.0 / x).powf(1.0 / q), w.integral(0.0, x).powf(1.0 / p));
    let r = grid::sup_1d(f, 0.0, 1.0, grid, &x_extra(u, w));
    Ok(ConditionReport::from_sup("bhc", json!({"u": u.to_string(), "w": w.to_string(), "p": p, "q": q}), grid, r))
}

/// `sup_{0<x<1} (∫_0^{1/x} u°)^{1/q} (∫_0^x w^{1−p'})^{1/p'}`.
///
/// At `p = 1` the second factor is `1 / ess inf_{(0,x)} w`.
pub fn hardy_dual_condition(u: &Weight, w: &Weight, p: f64, q: f64, grid: &Grid) -> Result<ConditionReport> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Hypothesis(format!("the dual Hardy condition needs 1 ≤ p < ∞, got p = {p}")));
    }
    check_pos("q", q)?;
    if q < 2.0 {
        return Err(Error::Hypothesis(format!("the dual Hardy condition needs q ≥ 2, got q = {q}")));
    }
    let level = level_weight(u)?.density;
    let pieces = w.pieces()?;
    let (dual_w, pc) = if p == 1.0 {
        (None, f64::INFINITY)
    } else {
        let pc = p / (p - 1.0);
        (Some(Weight::from_terms_lossy(pieces.iter().map(|t| Term::new(t.f.powf(1.0 - pc), t.lo, t.hi)))), pc)
    };
    let f = |x: f64| {
        let left = level.integral(0.0, 1.0 / x).powf(1.0 / q);
        if left == 0.0 {
            return 0.0;
        }
        if !covers(&pieces, x) {
            return f64::INFINITY;
        }
        let right = match &dual_w {
            Some(d) => d.integral(0.0, x).powf(1.0 / pc),
            None => 1.0 / ess_inf(&pieces, x),
        };
        left * right
    };
    let r = grid::sup_1d(f, 0.0, 1.0, grid, &x_extra(u, w));
    Ok(ConditionReport::from_sup("hardy_dual", json!({"u": u.to_string(), "w": w.to_string(), "p": p, "q": q}), grid, r))
}

/// Whether the disjoint pieces cover `(0, x)` without gaps.
fn covers(pieces: &[Term], x: f64) -> bool {
    let mut reach = 0.0;
    for t in pieces {
        if reach >= x {
            break;
        }
        if t.lo > reach * (1.0 + 1e-14) {
            return false;
        }
        reach = t.hi;
    }
    reach >= x
}

fn ess_inf(pieces: &[Term], x: f64) -> f64 {
    let mut best = f64::INFINITY;
    for t in pieces.iter().filter(|t| t.lo < x) {
        let hi = t.hi.min(x);
        let mut cands = vec![edge_value(&t.f, t.lo), t.f.eval(hi)];
        cands.extend(t.f.monotone_breaks(t.lo, hi).into_iter().map(|b| t.f.eval(b)));
        for c in cands {
            best = best.min(c);
        }
    }
    best
}

fn edge_value(f: &PowerLog, a: f64) -> f64 {
    if a == 0.0 {
        f.limit_at_zero()
    } else {
        f.eval(a)
    }
}

/// `sup_{z>1} z/(1+log z)^q · sup_{y>z} (1/y)∫_0^y u`.
pub fn llogl_condition(u: &Weight, q: f64, grid: &Grid) -> Result<ConditionReport> {
    check_pos("q", q)?;
    let f = |z: f64| z / (1.0 + z.ln()).powf(q) * sup_average_from(u, z);
    let mut extra = u.breakpoints();
    extra.retain(|&z| z > 1.0 && z.is_finite());
    let r = grid::sup_1d(f, 1.0, f64::INFINITY, grid, &extra);
    let mut rep = ConditionReport::from_sup("llogl", json!({"u": u.to_string(), "q": q}), grid, r);
    if q < 2.0 {
        rep.notes.push("the condition characterises boundedness only for q ≥ 2".into());
    }
    Ok(rep)
}

/// Lorentz–Zygmund weight on the circle: `t^{p/r−1}(1+|log t|)^{αp}` on `(0,1)`.
pub fn lz_weight_circle(r: f64, p: f64, alpha: f64) -> Weight {
    Weight::new(vec![Term::new(PowerLog::new(1.0, p / r - 1.0, alpha * p), 0.0, 1.0)]).expect("positive coefficient")
}

/// Lorentz–Zygmund weight on the integers: `t^{q/s−1}(1+|log t|)^{βq}` on `(0,∞)`.
pub fn lz_weight_sequence(s: f64, q: f64, beta: f64) -> Weight {
    Weight::new(vec![Term::new(PowerLog::new(1.0, q / s - 1.0, beta * q), 0.0, f64::INFINITY)])
        .expect("positive coefficient")
}

/// Indices of `L^{r,p}(log L)^α → ℓ^{s,q}(log ℓ)^β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LzIndices {
    #[serde(with = "crate::serde_ext::extended_f64")]
    pub r: f64,
    #[serde(with = "crate::serde_ext::extended_f64")]
    pub p: f64,
    pub alpha: f64,
    #[serde(with = "crate::serde_ext::extended_f64")]
    pub s: f64,
    pub q: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub holds: bool,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LzVerdict {
    pub indices: LzIndices,
    pub admissible: bool,
    pub clauses: Vec<Clause>,
}

impl LzVerdict {
    /// Names of the failing clauses.
    pub fn violations(&self) -> Vec<&str> {
        self.clauses.iter().filter(|c| !c.holds).map(|c| c.reason.as_str()).collect()
    }
}

const LZ_TOL: f64 = 1e-12;

/// Necessary index conditions for the Fourier coefficient map between
/// Lorentz–Zygmund spaces. A trivial domain space is a [`Error::Hypothesis`].
pub fn lz_admissible(ix: LzIndices) -> Result<LzVerdict> {
    let LzIndices { r, p, alpha, s, q, beta } = ix;
    if !(r > 0.0 && s > 0.0 && p > 0.0 && q > 0.0 && q.is_finite()) || alpha.is_nan() || beta.is_nan() {
        return Err(Error::InvalidInput("indices need r, s, p ∈ (0,∞], q ∈ (0,∞)".into()));
    }
    let nontrivial = r.is_finite()
        || (p.is_finite() && alpha * p < -1.0)
        || (p == f64::INFINITY && alpha <= 0.0);
    if !nontrivial {
        return Err(Error::Hypothesis(
            "domain space is trivial: need r < ∞, or r = ∞, p < ∞, αp < −1, or r = ∞, p = ∞, α ≤ 0".into(),
        ));
    }
    let mut clauses = Vec::new();
    let (holds, reason) = if s > 2.0 + LZ_TOL {
        (true, "s > 2".to_string())
    } else if (s - 2.0).abs() <= LZ_TOL {
        if beta <= 0.0 {
            (true, "s = 2 and β ≤ 0".into())
        } else {
            (false, "s = 2 and β ≤ 0 violated".into())
        }
    } else {
        (false, "s > 2 violated".into())
    };
    clauses.push(Clause { name: "s>2 or (s=2 and beta<=0)".into(), holds, reason });
    let sum = 1.0 / r + 1.0 / s;
    let (holds, reason) = if sum < 1.0 - LZ_TOL {
        (true, "1/r + 1/s < 1".to_string())
    } else if (sum - 1.0).abs() <= LZ_TOL {
        if beta <= alpha {
            (true, "1/r + 1/s = 1 and β ≤ α".into())
        } else {
            (false, "1/r + 1/s = 1 and β ≤ α violated".into())
        }
    } else {
        (false, "1/r + 1/s < 1 violated".into())
    };
    clauses.push(Clause { name: "1/r+1/s<1 or (=1 and beta<=alpha)".into(), holds, reason });
    Ok(LzVerdict { indices: ix, admissible: clauses.iter().all(|c| c.holds), clauses })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Weight {
        Weight::parse(s).unwrap()
    }

    #[test]
    fn dual_examples() {
        let v = dual_weight(&Weight::indicator(0.0, 1.0), 1.0);
        assert_eq!(v, w("t^-1 on(1,inf)"));
        let x = w("2*t^0.25*L^1 on(0.5,4) + t^-1 on(4,inf)");
        assert_eq!(dual_weight(&dual_weight(&x, 1.5), 1.5).to_string(), x.to_string());
        assert_eq!(dual_weight(&Weight::power(1.0, -0.5), 1.5), Weight::power(1.0, 0.0));
    }

    #[test]
    fn c_xy_unit_pair() {
        let g = Grid::default();
        let chi = Weight::indicator(0.0, 1.0);
        let r = c_xy(&chi, &chi, 1.0, &g).unwrap();
        assert_eq!(r.verdict, Verdict::Finite);
        assert!((r.value.unwrap() - 1.0).abs() < 1e-12, "{r:?}");
        let r = c_xy(&Weight::power(1.0, 0.0), &chi, 1.0, &g).unwrap();
        assert_eq!(r.verdict, Verdict::Infinite);
    }

    #[test]
    fn c_omega_unit_pair() {
        let g = Grid::default();
        let chi = Weight::indicator(0.0, 1.0);
        let r = c_omega(&chi, &chi, 1.0, 2.0, &g).unwrap();
        assert_eq!(r.verdict, Verdict::Finite);
        assert!((r.value.unwrap() - 1.0).abs() < 1e-9, "{r:?}");
        let r = c_omega(&Weight::power(1.0, 0.0), &chi, 1.0, 2.0, &g).unwrap();
        assert_eq!(r.verdict, Verdict::Infinite);
        assert!(c_omega(&chi, &chi, 1.0, 1.5, &g).is_err());
    }

    #[test]
    fn bhc_and_hardy_dual_examples() {
        let g = Grid::default();
        let chi = Weight::indicator(0.0, 1.0);
        let r = bhc_condition(&chi, &chi, 2.0, 2.0, &g).unwrap();
        assert!((r.value.unwrap() - 1.0).abs() < 1e-12);
        let r = hardy_dual_condition(&chi, &Weight::power(1.0, 0.0), 2.0, 2.0, &g).unwrap();
        assert!((r.value.unwrap() - 1.0).abs() < 1e-12, "{r:?}");
        let r = hardy_dual_condition(&chi, &Weight::indicator(0.5, 2.0), 2.0, 2.0, &g).unwrap();
        assert_eq!(r.verdict, Verdict::Infinite);
    }

    #[test]
    fn llogl_examples() {
        let g = Grid::default();
        let r = llogl_condition(&Weight::indicator(0.0, 1.0), 2.0, &g).unwrap();
        assert!((r.value.unwrap() - 1.0).abs() < 1e-9);
        let r = llogl_condition(&Weight::power(1.0, 0.0), 2.0, &g).unwrap();
        assert_eq!(r.verdict, Verdict::Infinite);
    }

    #[test]
    fn lz_rules() {
        let ix = |r, s, alpha, beta| LzIndices { r, p: 2.0, alpha, s, q: 2.0, beta };
        assert!(lz_admissible(ix(1.5, 3.0, 0.0, 0.0)).unwrap().admissible);
        let v = lz_admissible(ix(1.5, 2.0, 0.0, 0.1)).unwrap();
        assert!(!v.admissible);
        assert!(v.clauses[0].reason.contains("s = 2 and β ≤ 0 violated"));
        assert!(lz_admissible(ix(4.0, 2.0, 0.0, -1.0)).unwrap().admissible);
        assert!(matches!(lz_admissible(ix(f64::INFINITY, 3.0, 0.0, 0.0)), Err(Error::Hypothesis(_))));
    }
}
