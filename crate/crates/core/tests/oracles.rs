//! Library results against values computed independently in the test.

use lorentz_core::conditions::{c_omega, c_xy, llogl_condition};
use lorentz_core::fourier::{coefficients, jt_rhs, ModulatedStep};
use lorentz_core::norms::{bp_constant, gamma_norm, lambda_norm};
use lorentz_core::{sample, Grid, StepFunction, Verdict, Weight};

/// Composite Simpson on `[a, b]` with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn gamma_norm_matches_simpson() {
    let mut rng = sample::rng(11);
    for _ in 0..10 {
        let f = sample::step_function(&mut rng);
        let r = f.rearrange().unwrap();
        let w = Weight::indicator(0.0, 5.0);
        let got = gamma_norm(&f, 2.0, &w).unwrap().value.powi(2);
        // f** on [0,5], split at the breakpoints so Simpson sees smooth pieces
        let mut cuts = vec![0.0];
        cuts.extend(r.as_step().breakpoints().iter().copied().filter(|&b| b < 5.0));
        cuts.push(5.0);
        let mut expect = 0.0;
        for c in cuts.windows(2) {
            let avg2 = |t: f64| (r.integral_to(t) / t).powi(2);
            expect += if c[0] == 0.0 {
                r.eval(0.0).powi(2) * c[1]
            } else {
                simpson(|s| avg2(s.exp()) * s.exp(), c[0].ln(), c[1].ln(), 2000)
            };
        }
        assert!((got - expect).abs() <= 1e-8 * expect, "{got} vs {expect}");
    }
}

#[test]
fn lambda_norm_by_hand() {
    // f* = 2 on [0,1), 1 on [1,3); w = t on (0,∞): ∫ f*² t = 4·½ + 1·(9−1)/2
    let f = StepFunction::from_cells(&[2.0, 1.0], &[1.0, 2.0]).unwrap();
    let w = Weight::parse("t^1").unwrap();
    let v = lambda_norm(&f, 2.0, &w).unwrap().value;
    assert!((v * v - 6.0).abs() < 1e-12);
}

#[test]
fn unit_pair_conditions() {
    let u = Weight::indicator(0.0, 1.0);
    let g = Grid::default();
    let cxy = c_xy(&u, &u, 1.0, &g).unwrap();
    assert_eq!(cxy.verdict, Verdict::Finite);
    assert!((cxy.estimate() - 1.0).abs() < 1e-9);
    // the ratio is 1/(1+ln z)², largest as z → 1
    let co = c_omega(&u, &u, 1.0, 2.0, &g).unwrap();
    assert!((co.estimate() - 1.0).abs() < 1e-9);
}

#[test]
fn unbounded_pair_diverges() {
    let g = Grid::default();
    let r = c_xy(&Weight::parse("t^0").unwrap(), &Weight::indicator(0.0, 1.0), 1.0, &g).unwrap();
    assert_eq!(r.verdict, Verdict::Infinite);
    let l = llogl_condition(&Weight::parse("t^0").unwrap(), 2.0, &g).unwrap();
    assert_eq!(l.verdict, Verdict::Infinite);
}

#[test]
fn bp_constant_of_power() {
    // w = t^a: the ratio is t^p ∫_t^∞ s^{a-p} / ∫_0^t s^a = (a+1)/(p-a-1) for every t
    let (a, p) = (0.5, 2.0);
    let r = bp_constant(&Weight::parse("t^0.5").unwrap(), p, &Grid::default()).unwrap();
    assert!((r.value - (a + 1.0) / (p - a - 1.0)).abs() < 1e-9);
}

#[test]
fn indicator_coefficients_closed_form() {
    let z = 5.0;
    let t = coefficients(&ModulatedStep::indicator(0.0, 1.0 / z).unwrap(), 100).unwrap();
    for k in 1..100i64 {
        let x = k as f64 * std::f64::consts::PI / z;
        let expect = x.sin().abs() / (k as f64 * std::f64::consts::PI);
        assert!((t.get(k).unwrap() - expect).abs() < 1e-15);
    }
}

#[test]
fn jt_right_side_by_quadrature() {
    let g = StepFunction::from_cells(&[0.1, 0.2, 0.3], &[3.0, 1.0, 0.5]).unwrap().rearrange().unwrap();
    for z in [0.5, 2.0, 10.0] {
        // substitute s = 1/t: ∫_0^z F(1/t)² dt
        let f = |t: f64| if t == 0.0 { g.integral_to(1e9).powi(2) } else { g.integral_to(1.0 / t).powi(2) };
        let mut cuts = vec![0.0];
        cuts.extend([1.0 / 0.6, 1.0 / 0.5, 1.0 / 0.3, 1.0 / 0.1].into_iter().filter(|&c| c < z));
        cuts.push(z);
        let expect: f64 = cuts.windows(2).map(|c| simpson(f, c[0], c[1], 4000)).sum();
        let got = jt_rhs(&g, z);
        assert!((got - expect).abs() < 1e-9 * expect, "z={z}: {got} vs {expect}");
    }
}
