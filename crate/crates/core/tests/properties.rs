use lorentz_core::cones::{sample_cone, ConeParams};
use lorentz_core::conditions::dual_weight;
use lorentz_core::fourier::{coefficients, testfun_full, ModulatedStep, Piece};
use lorentz_core::level::level_function;
use lorentz_core::norms::{gamma_norm, lambda_norm};
use lorentz_core::{grid, sample, AveragingOp};
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rearrangement_is_equimeasurable(seed in any::<u64>(), lambda in 0.0f64..3.0) {
        let f = sample::step_function(&mut sample::rng(seed));
        let r = f.rearrange().unwrap();
        let a = f.distribution(lambda).unwrap();
        let b = r.as_step().distribution(lambda).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        prop_assert!((f.l1_norm() - r.as_step().l1_norm()).abs() <= 1e-12 * f.l1_norm());
        prop_assert!(r.as_step().is_nonincreasing());
    }

    #[test]
    fn hardy_average_dominates(seed in any::<u64>(), t in 1e-3f64..1e3) {
        let r = sample::step_function(&mut sample::rng(seed)).rearrange().unwrap();
        let avg = r.hardy_average(t).unwrap();
        prop_assert!(avg >= r.eval(t) * (1.0 - 1e-12));
        prop_assert!(r.hardy_average(t * 1.5).unwrap() <= avg * (1.0 + 1e-12));
    }

    #[test]
    fn level_function_majorizes(seed in any::<u64>(), x in 1e-3f64..1e3) {
        let u = sample::step_function(&mut sample::rng(seed));
        let l = level_function(&u).unwrap();
        prop_assert!(l.as_step().is_nonincreasing());
        prop_assert!(l.integral_to(x) >= u.integral_to(x) * (1.0 - 1e-12));
        let total = u.l1_norm();
        prop_assert!((l.integral_to(1e6) - total).abs() <= 1e-10 * total);
    }

    #[test]
    fn lambda_below_gamma(seed in any::<u64>(), p in 0.5f64..4.0) {
        let mut rng = sample::rng(seed);
        let f = sample::step_function(&mut rng);
        let w = sample::step_weight(&mut rng);
        let l = lambda_norm(&f, p, &w).unwrap().value;
        let g = gamma_norm(&f, p, &w).unwrap().value;
        prop_assert!(l <= g * (1.0 + 1e-10));
    }

    #[test]
    fn dual_weight_involution(seed in any::<u64>(), p in 0.5f64..3.0, t in 1e-2f64..1e2) {
        let w = sample::step_weight(&mut sample::rng(seed));
        let back = dual_weight(&dual_weight(&w, p), p);
        prop_assert!((back.eval(t) - w.eval(t)).abs() <= 1e-9 * w.eval(t).max(1.0));
    }

    #[test]
    fn coefficient_bounds(seed in any::<u64>()) {
        let g = sample::modulated_step(&mut sample::rng(seed));
        let t = coefficients(&g, 512).unwrap();
        let l1 = g.l1_norm();
        prop_assert!(t.values.iter().all(|&v| v <= l1 * (1.0 + 1e-12)));
        let energy = t.energy();
        let l2 = g.l2_norm_sq();
        prop_assert!(energy <= l2 * (1.0 + 1e-10));
        prop_assert!(l2 - energy <= t.tail_energy_bound());
    }

    #[test]
    fn translation_and_modulation(seed in any::<u64>(), dx in 0.0f64..0.2, m in -20i64..20) {
        let g = sample::modulated_step(&mut sample::rng(seed));
        let room = 1.0 - g.pieces().last().unwrap().x1;
        let dx = dx.min(room);
        let h = g.shifted(dx).unwrap();
        let gm = g.modulated(m);
        for n in -30i64..30 {
            let rot = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * n as f64 * dx);
            prop_assert!((h.coefficient(n) - rot * g.coefficient(n)).norm() <= 1e-12 * (1.0 + g.l1_norm()));
            prop_assert!((gm.coefficient(n + m) - g.coefficient(n)).norm() <= 1e-13 * (1.0 + g.l1_norm()));
        }
    }

    #[test]
    fn real_functions_have_paired_coefficients(cells in prop::collection::vec((0.01f64..0.1, 0.1f64..3.0), 1..6)) {
        let mut x = 0.0;
        let pieces: Vec<Piece> = cells.iter().map(|&(len, a)| { let p = Piece::new(x, x + len, a, 0, 0.0); x += len; p }).collect();
        let g = ModulatedStep::new(pieces).unwrap();
        for n in 1..50i64 {
            prop_assert!((g.coefficient(-n) - g.coefficient(n).conj()).norm() <= 1e-14);
        }
    }

    #[test]
    fn test_function_rearrangement_fits(seed in any::<u64>(), z in 1.0f64..300.0) {
        let op = sample::averaging_op(&mut sample::rng(seed), 0.5, 1e4);
        let f = testfun_full(z, &op, 1e-2).unwrap();
        let m = f.test.g.modulus();
        prop_assert!(m.values().iter().all(|&v| v <= 1.0));
        prop_assert!(f.test.g.support_length() <= 1.0 / z + 1e-12);
    }

    #[test]
    fn sampled_cone_elements_certify(seed in any::<u64>(), xi in prop::sample::select(vec![0.0, 1.0])) {
        let params = ConeParams::new(2.0, 0.0, xi).unwrap();
        let pts = grid::geometric(1e-3, 1e4, 16);
        for g in sample_cone(params, seed, 4) {
            prop_assert!(g.certify(&pts).is_ok());
        }
    }
}

#[test]
fn averaging_family_is_seeded() {
    let a = sample::averaging_op(&mut sample::rng(3), 1.0, 100.0);
    let b = sample::averaging_op(&mut sample::rng(3), 1.0, 100.0);
    assert_eq!(a, b);
    assert_ne!(AveragingOp::identity(), AveragingOp::single(1.0, 2.0).unwrap());
}
