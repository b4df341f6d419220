//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::time::{Duration, Instant};

use lorentz_core::cones::{apply_k_weight, ell_n, ratio_supremum_bounds, sample_cone, ConeElement, ConeParams};
use lorentz_core::conditions::{c_xy, dual_weight, lz_admissible, LzIndices};
use lorentz_core::fourier::{
    check_bound, jt_check_refined, testfun_basic, verify_inequality, InequalityKind, Suite,
    JT_CONSTANT,
};
use lorentz_core::level::{least_concave_majorant, level_function};
use lorentz_core::norms::{gamma_norm, lambda_norm, theta_norm};
use lorentz_core::sample;
use lorentz_core::{AveragingOp, Grid, StepFunction, Verdict, Weight};
use rand::Rng;

struct Line {
    id: u32,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn run(id: u32, f: impl FnOnce() -> (bool, String)) -> Line {
    let start = Instant::now();
    let (pass, detail) = f();
    Line { id, pass, detail, elapsed: start.elapsed() }
}

/// Coefficient bound for the short indicator at `z ∈ {3,4,8,16}`, `y ≤ 10^4`.
fn basic_bound() -> (bool, String) {
    let start = Instant::now();
    let mut worst = f64::INFINITY;
    let mut ok = true;
    for z in [3.0, 4.0, 8.0, 16.0] {
        let t = testfun_basic(z).unwrap();
        let c = check_bound(&t, 10_000, 65_536).unwrap();
        ok &= c.holds && c.unverifiable_from.is_none();
        worst = worst.min(c.worst_margin);
    }
    let secs = start.elapsed().as_secs_f64();
    (ok && secs < 10.0, format!("min margin {worst:.3e}, {secs:.2} s (limit 10 s)"))
}

/// Jodeit–Torchinsky with constant 8 on 100 random functions.
fn jodeit_torchinsky() -> (bool, String) {
    let start = Instant::now();
    let zs: Vec<f64> = (0..=12).map(|k| 2f64.powi(k)).collect();
    let mut max = 0.0f64;
    let mut coarse = 0;
    for g in sample::modulated_steps(2024, 100) {
        let r = jt_check_refined(&g, &zs, 65_536, 1 << 20).unwrap();
        max = max.max(r.max_ratio);
        coarse += r.coarse_truncation as usize;
    }
    let secs = start.elapsed().as_secs_f64();
    (
        max <= JT_CONSTANT && secs < 60.0,
        format!("max ratio {max:.4} ≤ {JT_CONSTANT}; coarse truncation in {coarse}/100; {secs:.1} s (limit 60 s)"),
    )
}

/// Upper hull of `(x, y)` points by a monotone chain.
fn hull(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut h: Vec<(f64, f64)> = Vec::new();
    for &p in pts {
        while h.len() >= 2 {
            let (a, b) = (h[h.len() - 2], h[h.len() - 1]);
            if (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) >= 0.0 {
                h.pop();
            } else {
                break;
            }
        }
        h.push(p);
    }
    h
}

fn interp(h: &[(f64, f64)], x: f64) -> f64 {
    let i = h.partition_point(|p| p.0 <= x);
    if i == 0 {
        return h[0].1;
    }
    if i == h.len() {
        return h[h.len() - 1].1;
    }
    let (a, b) = (h[i - 1], h[i]);
    a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
}

/// Level function against a grid majorant.
fn level_oracle() -> (bool, String) {
    let mut worst = 0.0f64;
    let mut fixed_ok = true;
    for u in sample::step_functions(77, 50) {
        let lvl = level_function(&u).unwrap();
        let end = u.end() * 1.5;
        let mut xs: Vec<f64> = (0..10_000).map(|i| end * i as f64 / 9_999.0).collect();
        xs.extend(u.breakpoints());
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let pts: Vec<(f64, f64)> = xs.iter().map(|&x| (x, u.integral_to(x))).collect();
        let h = hull(&pts);
        for &x in &xs {
            let brute = interp(&h, x);
            let got = lvl.integral_to(x);
            let rel = (got - brute).abs() / brute.abs().max(1e-300);
            if brute > 0.0 {
                worst = worst.max(rel);
            }
        }
        let d = u.rearrange().unwrap();
        fixed_ok &= level_function(d.as_step()).unwrap() == d;
    }
    (worst <= 1e-8 && fixed_ok, format!("max relative deviation {worst:.2e} (tol 1e-8); decreasing inputs fixed: {fixed_ok}"))
}

/// `K ℓ_n` increases to the concave majorant.
fn monotone_approximation() -> (bool, String) {
    let params0 = |xi| ConeParams::new(0.0, 1.0, xi).unwrap();
    let mut rng = sample::rng(404);
    let xs = lorentz_core::grid::geometric(0.01, 50.0, 64);
    let ns = [2u32, 8, 32, 128, 512];
    let mut monotone = true;
    let mut below = true;
    let mut gap2 = 0.0f64;
    let mut gap512 = 0.0f64;
    let mut improved = true;
    for i in 0..20 {
        let xi = if i % 2 == 0 { 0.0 } else { rng.gen_range(0.5..2.0) };
        let p = params0(xi);
        let h = sample::step_weight(&mut rng).restrict(0.0, 40.0);
        let g = apply_k_weight(p, &h);
        // nodes of the concave function g, perturbed so corners do not sit on a regular grid
        let mut nodes = vec![(0.0, 0.0)];
        let mut t = 0.02;
        while t < 60.0 {
            let x = t * (1.0 + 0.3 * rng.gen::<f64>());
            nodes.push((x, g.eval(x)));
            t *= 1.5;
        }
        if xi > 0.0 {
            nodes.push((xi, g.eval(xi)));
            nodes.retain(|n| n.0 == 0.0 || n.0 >= xi);
        }
        nodes.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        nodes.dedup_by(|a, b| a.0 == b.0);
        let m = least_concave_majorant(&nodes, 0.0).unwrap();
        let mut prev = vec![0.0; xs.len()];
        let mut gaps = Vec::new();
        for &n in &ns {
            let k = apply_k_weight(p, &ell_n(&m, xi, n).unwrap());
            let mut gap = 0.0f64;
            for (j, &x) in xs.iter().enumerate() {
                let v = k.eval(x);
                let target = m.eval(x);
                monotone &= v >= prev[j] - 1e-12 * target;
                below &= v <= target * (1.0 + 1e-12);
                gap = gap.max((target - v) / target);
                prev[j] = v;
            }
            gaps.push(gap);
        }
        improved &= gaps[4] < gaps[0];
        gap2 = gap2.max(gaps[0]);
        gap512 = gap512.max(gaps[4]);
    }
    (
        monotone && below && improved && gap512 < 1e-2,
        format!("monotone {monotone}, below majorant {below}; max relative gap n=2 {gap2:.3e}, n=512 {gap512:.3e} (tol 1e-2)"),
    )
}

/// Sampled cone ratios sit between the kernel-section sup and its multiple.
fn cone_sandwich() -> (bool, String) {
    let params = ConeParams::omega();
    let grid = Grid::default();
    let u = Weight::indicator(0.0, 1.0);
    let mut ok = true;
    let mut parts = Vec::new();
    for (p, q) in [(1.0, 2.0), (2.0, 2.0), (1.0, 3.0)] {
        let v = dual_weight(&Weight::indicator(0.0, 1.0), p);
        let (pe, qe) = (p / 2.0, q / 2.0);
        let pre = ratio_supremum_bounds(params, &u, &v, pe, qe, &AveragingOp::identity(), &[], &grid).unwrap();
        let mut samples = sample_cone(params, 5, 200);
        samples.push(ConeElement::section(params, pre.grid.argmax, 1.0).unwrap());
        let r = ratio_supremum_bounds(params, &u, &v, pe, qe, &AveragingOp::identity(), &samples, &grid).unwrap();
        let s = r.sampled.unwrap();
        let good = r.lower <= s * (1.0 + 1e-12) && s <= r.upper * (1.0 + 1e-6);
        ok &= good;
        parts.push(format!("(p,q)=({p},{q}): {:.6} ≤ {s:.6} ≤ {:.6}", r.lower, r.upper));
    }
    (ok, parts.join("; "))
}

/// Sandwich for the bounded pair.
fn bounded_pair() -> (bool, String) {
    let start = Instant::now();
    let u = Weight::indicator(0.0, 1.0);
    let w = Weight::indicator(0.0, 1.0);
    let grid = Grid::default();
    let cxy = c_xy(&u, &w, 1.0, &grid).unwrap().estimate();
    let suite = Suite { random: 0, seed: 0, adversarial_z: Suite::dyadic_z(), eps: 1e-3 };
    let r = verify_inequality(&u, &w, 1.0, 2.0, InequalityKind::GammaGamma, &suite, 65_536, &grid).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ceil = 8.0 * cxy * (1.0 + 1e-6);
    let floor = cxy / 549.0;
    (
        r.max_upper <= ceil && r.max_lower >= floor && secs < 300.0,
        format!("C_xy = {cxy:.6}; R ∈ [{:.6}, {:.6}]; ceiling {ceil:.6}; floor {floor:.6}; {secs:.1} s", r.max_lower, r.max_upper),
    )
}

/// Unbounded pair: divergence verdict and growing adversarial ratios.
fn unbounded_pair() -> (bool, String) {
    let u = Weight::parse("t^0").unwrap();
    let w = Weight::indicator(0.0, 1.0);
    let grid = Grid::default();
    let c = c_xy(&u, &w, 1.0, &grid).unwrap();
    let suite = Suite { random: 0, seed: 0, adversarial_z: vec![4.0, 16.0, 64.0, 256.0], eps: 1e-3 };
    let r = verify_inequality(&u, &w, 1.0, 2.0, InequalityKind::GammaGamma, &suite, 65_536, &grid).unwrap();
    let vals: Vec<f64> = r.adversarial.iter().map(|l| l.lower).collect();
    let factors: Vec<f64> = vals.windows(2).map(|p| p[1] / p[0]).collect();
    let growth = factors.iter().all(|&f| f >= 1.5);
    (
        c.verdict == Verdict::Infinite && growth,
        format!(
            "C_xy verdict {:?}; ratios {}; step factors {} (need ≥ 1.5)",
            c.verdict,
            vals.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(", "),
            factors.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

/// Lorentz–Zygmund index rule on hand-picked tuples.
fn lz_table() -> (bool, String) {
    let inf = f64::INFINITY;
    // (r, p, α, s, q, β, admissible, reasons of failing clauses)
    let cases: [(f64, f64, f64, f64, f64, f64, bool, &[&str]); 12] = [
        (1.5, 2.0, 0.0, 3.0, 2.0, 0.0, true, &[]),
        (2.0, 1.0, 0.5, 2.5, 1.0, -1.0, true, &[]),
        (1.5, 2.0, 0.0, 2.0, 2.0, -0.5, false, &["1/r + 1/s < 1 violated"]),
        (3.0, 2.0, 0.0, 2.0, 2.0, -0.5, true, &[]),
        (3.0, 2.0, 0.0, 2.0, 2.0, 0.1, false, &["s = 2 and β ≤ 0 violated"]),
        (1.5, 2.0, 0.0, 2.0, 2.0, 0.1, false, &["s = 2 and β ≤ 0 violated", "1/r + 1/s < 1 violated"]),
        (2.0, 2.0, 0.0, 1.5, 2.0, 0.0, false, &["s > 2 violated", "1/r + 1/s < 1 violated"]),
        (4.0, 1.0, 0.0, 1.5, 1.0, 0.0, false, &["s > 2 violated"]),
        (1.5, 2.0, 1.0, 3.0, 2.0, 0.5, true, &[]),
        (1.5, 2.0, 0.0, 3.0, 2.0, 0.5, false, &["1/r + 1/s = 1 and β ≤ α violated"]),
        (2.0, 2.0, 0.0, 2.0, 2.0, 0.0, true, &[]),
        (inf, 1.0, -2.0, 3.0, 1.0, 0.0, true, &[]),
    ];
    let mut bad = Vec::new();
    for (i, &(r, p, alpha, s, q, beta, adm, reasons)) in cases.iter().enumerate() {
        let v = lz_admissible(LzIndices { r, p, alpha, s, q, beta }).unwrap();
        let got = v.violations();
        if v.admissible != adm || got != reasons {
            bad.push(format!("case {i}: got {got:?}"));
        }
    }
    (bad.is_empty(), if bad.is_empty() { "12/12 verdicts match".into() } else { bad.join("; ") })
}

/// `Λ ≤ Θ-lower ≤ Θ-upper ≤ Γ`.
fn norm_ordering() -> (bool, String) {
    let mut rng = sample::rng(99);
    let mut fails = 0;
    for i in 0..100 {
        let f: StepFunction = sample::step_function(&mut rng);
        let w = sample::step_weight(&mut rng);
        let p = [1.0, 2.0, 3.0][i % 3];
        let h = f.rearrange().unwrap();
        let l = lambda_norm(&f, p, &w).unwrap().value;
        let g = gamma_norm(&f, p, &w).unwrap().value;
        let t = theta_norm(&h, p, &w).unwrap();
        let tol = 1e-10;
        let ok = l <= t.lower.value * (1.0 + tol)
            && t.lower.value <= t.upper.value * (1.0 + tol)
            && t.upper.value <= g * (1.0 + tol);
        fails += !ok as usize;
    }
    (fails == 0, format!("{}/100 orderings hold", 100 - fails))
}

fn main() {
    let checks: Vec<(u32, fn() -> (bool, String))> = vec![
        (1, basic_bound),
        (2, jodeit_torchinsky),
        (3, level_oracle),
        (4, monotone_approximation),
        (5, cone_sandwich),
        (6, bounded_pair),
        (7, unbounded_pair),
        (8, lz_table),
        (9, norm_ordering),
    ];
    let only: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (id, f) in checks {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let l = run(id, f);
        failed += !l.pass as usize;
        println!(
            "criterion {}: {} ({:.2} s) {}",
            l.id,
            if l.pass { "PASS" } else { "FAIL" },
            l.elapsed.as_secs_f64(),
            l.detail
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
