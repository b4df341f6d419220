//! Seeded random inputs for tests, property checks and verifier suites.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::averaging::AveragingOp;
use crate::fourier::{ModulatedStep, Piece};
use crate::powerlog::PowerLog;
use crate::stepfn::{Domain, StepFunction};
use crate::weight::{Term, Weight};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn exp1(rng: &mut ChaCha8Rng) -> f64 {
    -(1.0 - rng.gen::<f64>()).ln()
}

/// `k` sorted log-uniform points in `(lo, hi)`, strictly increasing.
fn log_points(rng: &mut ChaCha8Rng, k: usize, lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let mut v: Vec<f64> = (0..k).map(|_| rng.gen_range(a..b).exp()).collect();
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    v.dedup();
    v
}

/// Nonnegative step function on `(0, ∞)` with 1 to 8 cells and `Exp(1)` heights,
/// some of them zero.
pub fn step_function(rng: &mut ChaCha8Rng) -> StepFunction {
    let k = rng.gen_range(1..=8);
    let bps = log_points(rng, k, 1e-2, 1e2);
    let mut vals: Vec<f64> = bps.iter().map(|_| if rng.gen_bool(0.15) { 0.0 } else { exp1(rng) }).collect();
    if vals.iter().all(|&v| v == 0.0) {
        vals[0] = 1.0;
    }
    StepFunction::new(bps, vals, None, Domain::Halfline).expect("sorted positive breakpoints")
}

/// Positive step weight on `(0, t_end)` with 1 to 8 cells; with probability
/// 1/2 a positive constant continues it to `∞`.
pub fn step_weight(rng: &mut ChaCha8Rng) -> Weight {
    let k = rng.gen_range(1..=8);
    let bps = log_points(rng, k, 1e-2, 1e2);
    let mut terms = Vec::with_capacity(k + 1);
    let mut lo = 0.0;
    for &b in &bps {
        terms.push(Term::new(PowerLog::constant(exp1(rng).max(1e-3)), lo, b));
        lo = b;
    }
    if rng.gen_bool(0.5) {
        terms.push(Term::new(PowerLog::constant(exp1(rng).max(1e-3)), lo, f64::INFINITY));
    }
    Weight::new(terms).expect("disjoint cells")
}

/// 1 to 8 disjoint pieces in `[0, 1)`, `Exp(1)` amplitudes, frequencies in
/// `[−64, 64]`, uniform phases.
pub fn modulated_step(rng: &mut ChaCha8Rng) -> ModulatedStep {
    let k = rng.gen_range(1..=8);
    let mut ends: Vec<f64> = (0..2 * k).map(|_| rng.gen::<f64>()).collect();
    ends.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut pieces: Vec<Piece> = ends
        .chunks(2)
        .filter(|c| c[1] > c[0])
        .map(|c| {
            Piece::new(
                c[0],
                c[1],
                exp1(rng).max(1e-3),
                rng.gen_range(-64..=64),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    if pieces.is_empty() {
        pieces.push(Piece::new(0.0, 0.5, 1.0, 0, 0.0));
    }
    ModulatedStep::new(pieces).expect("disjoint pieces in [0,1)")
}

/// Up to 4 disjoint averaging intervals inside `(lo, hi)`.
pub fn averaging_op(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> AveragingOp {
    let k = rng.gen_range(0..=4);
    let pts = log_points(rng, 2 * k, lo, hi);
    let iv = pts.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    AveragingOp::new(iv).expect("sorted disjoint pairs")
}

pub fn step_functions(seed: u64, count: usize) -> Vec<StepFunction> {
    let mut r = rng(seed);
    (0..count).map(|_| step_function(&mut r)).collect()
}

pub fn step_weights(seed: u64, count: usize) -> Vec<Weight> {
    let mut r = rng(seed);
    (0..count).map(|_| step_weight(&mut r)).collect()
}

pub fn modulated_steps(seed: u64, count: usize) -> Vec<ModulatedStep> {
    let mut r = rng(seed);
    (0..count).map(|_| modulated_step(&mut r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        assert_eq!(modulated_steps(7, 5), modulated_steps(7, 5));
        assert_eq!(step_weights(7, 5), step_weights(7, 5));
        assert_ne!(step_functions(7, 3), step_functions(8, 3));
    }
}
