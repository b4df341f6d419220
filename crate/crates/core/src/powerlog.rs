//! Power-log monomials `c·t^a·(1+|log t|)^b` and their exact integrals.

use serde::{Deserialize, Serialize};

use crate::quad::{self, REL_TOL};

/// `1 + |log t|`.
#[inline]
pub fn log_factor(t: f64) -> f64 {
    1.0 + t.ln().abs()
}

/// The monomial `c·t^a·(1+|log t|)^b` on `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLog {
    pub c: f64,
    pub a: f64,
    pub b: f64,
}

impl PowerLog {
    pub const fn new(c: f64, a: f64, b: f64) -> Self {
        Self { c, a, b }
    }

    pub const fn constant(c: f64) -> Self {
        Self { c, a: 0.0, b: 0.0 }
    }

    pub const fn power(c: f64, a: f64) -> Self {
        Self { c, a, b: 0.0 }
    }

    pub fn is_constant(&self) -> bool {
        self.a == 0.0 && self.b == 0.0
    }

    pub fn eval(&self, t: f64) -> f64 {
        if self.c == 0.0 {
            return 0.0;
        }
        if t <= 0.0 {
            return self.limit_at_zero();
        }
        if !t.is_finite() {
            return self.limit_at_infinity();
        }
        let mut v = self.c;
        if self.a != 0.0 {
            v *= t.powf(self.a);
        }
        if self.b != 0.0 {
            v *= log_factor(t).powf(self.b);
        }
        v
    }

    pub fn mul(&self, other: &PowerLog) -> PowerLog {
        PowerLog::new(self.c * other.c, self.a + other.a, self.b + other.b)
    }

    pub fn scale(&self, s: f64) -> PowerLog {
        PowerLog::new(self.c * s, self.a, self.b)
    }

    /// `(c t^a L^b)^r`.
    pub fn powf(&self, r: f64) -> PowerLog {
        PowerLog::new(self.c.powf(r), self.a * r, self.b * r)
    }

    pub fn limit_at_infinity(&self) -> f64 {
        if self.c == 0.0 {
            return 0.0;
        }
        match (self.a.partial_cmp(&0.0), self.b.partial_cmp(&0.0)) {
            (Some(std::cmp::Ordering::Greater), _) => f64::INFINITY,
            (Some(std::cmp::Ordering::Less), _) => 0.0,
            (_, Some(std::cmp::Ordering::Greater)) => f64::INFINITY,
            (_, Some(std::cmp::Ordering::Less)) => 0.0,
            _ => self.c,
        }
    }

    pub fn limit_at_zero(&self) -> f64 {
        if self.c == 0.0 {
            return 0.0;
        }
        match (self.a.partial_cmp(&0.0), self.b.partial_cmp(&0.0)) {
            (Some(std::cmp::Ordering::Less), _) => f64::INFINITY,
            (Some(std::cmp::Ordering::Greater), _) => 0.0,
            (_, Some(std::cmp::Ordering::Greater)) => f64::INFINITY,
            (_, Some(std::cmp::Ordering::Less)) => 0.0,
            _ => self.c,
        }
    }

    /// `∫_{x0}^{x1} c t^a L(t)^b dt` for `0 ≤ x0 ≤ x1 ≤ ∞`; `+∞` when divergent.
    pub fn integral(&self, x0: f64, x1: f64) -> f64 {
        let x0 = x0.max(0.0);
        if !(x1 > x0) || self.c == 0.0 {
            return 0.0;
        }
        if self.b == 0.0 {
            return self.c * power_integral(self.a, x0, x1);
        }
        let k = self.a + 1.0;
        let mut total = 0.0;
        if x1 > 1.0 {
            // t = e^{σ-1}, σ = 1 + log t ≥ 1
            let lo = x0.max(1.0);
            let s0 = 1.0 + lo.ln();
            let s1 = if x1.is_finite() { 1.0 + x1.ln() } else { f64::INFINITY };
            total += exp_power_integral(-k, k, self.b, s0, s1);
        }
        if x0 < 1.0 {
            // t = e^{1-σ}, σ = 1 - log t ≥ 1
            let hi = x1.min(1.0);
            let s0 = 1.0 - hi.ln();
            let s1 = if x0 > 0.0 { 1.0 - x0.ln() } else { f64::INFINITY };
            total += exp_power_integral(k, -k, self.b, s0, s1);
        }
        self.c * total
    }

    /// Whether the monomial is non-increasing on `(x0, x1)`.
    pub fn is_nonincreasing_on(&self, x0: f64, x1: f64) -> bool {
        if self.c == 0.0 || self.is_constant() {
            return true;
        }
        // t (log f)' = a + b·sign(t-1)/L, so the sign is that of a·L ± b.
        let tol = 1e-12 * (self.a.abs() + self.b.abs());
        let check = |coef_b: f64, l_lo: f64, l_hi: f64| -> bool {
            let at_lo = self.a * l_lo + coef_b <= tol;
            let at_hi = if l_hi.is_finite() {
                self.a * l_hi + coef_b <= tol
            } else {
                self.a < 0.0 || (self.a == 0.0 && coef_b <= tol)
            };
            at_lo && at_hi
        };
        let mut ok = true;
        if x0 < 1.0 {
            let hi = x1.min(1.0);
            let l_lo = 1.0 - hi.ln();
            let l_hi = if x0 > 0.0 { 1.0 - x0.ln() } else { f64::INFINITY };
            ok &= check(-self.b, l_lo, l_hi);
        }
        if x1 > 1.0 {
            let lo = x0.max(1.0);
            let l_lo = 1.0 + lo.ln();
            let l_hi = if x1.is_finite() { 1.0 + x1.ln() } else { f64::INFINITY };
            ok &= check(self.b, l_lo, l_hi);
        }
        ok
    }

    /// Points in `(x0, x1)` splitting the monomial into monotone pieces.
    pub fn monotone_breaks(&self, x0: f64, x1: f64) -> Vec<f64> {
        let mut pts = Vec::new();
        if self.b != 0.0 {
            pts.push(1.0);
            if self.a != 0.0 {
                // t > 1: a L + b = 0
                let l = -self.b / self.a;
                if l > 1.0 {
                    pts.push((l - 1.0).exp());
                }
                // t < 1: a L - b = 0
                let l = self.b / self.a;
                if l > 1.0 {
                    pts.push((1.0 - l).exp());
                }
            }
        }
        pts.retain(|&p| p > x0 && p < x1 && p.is_finite() && p > 0.0);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts
    }

    /// Lebesgue measure of `{t ∈ (x0, x1) : f(t) > λ}`; may be `+∞`.
    pub fn superlevel_measure(&self, lambda: f64, x0: f64, x1: f64) -> f64 {
        if !(x1 > x0) || self.c <= 0.0 {
            return 0.0;
        }
        if self.is_constant() {
            return if self.c > lambda { x1 - x0 } else { 0.0 };
        }
        let mut edges = vec![x0];
        edges.extend(self.monotone_breaks(x0, x1));
        edges.push(x1);
        let mut total = 0.0;
        for w in edges.windows(2) {
            total += self.monotone_piece_measure(lambda, w[0], w[1]);
        }
        total
    }

    fn monotone_piece_measure(&self, lambda: f64, l: f64, r: f64) -> f64 {
        let fl = self.eval(l);
        let fr = self.eval(r);
        if fl > lambda && fr > lambda {
            return r - l;
        }
        if fl <= lambda && fr <= lambda {
            // monotone piece: interior values lie between the endpoint values
            return 0.0;
        }
        let root = self.crossing(lambda, l, r);
        if fl > lambda {
            root - l
        } else {
            r - root
        }
    }

    /// Bisection on `log t` for `f(t) = λ` on a monotone piece with a sign change.
    fn crossing(&self, lambda: f64, l: f64, r: f64) -> f64 {
        let mut lo = if l > 0.0 { l.ln() } else { -1.0 };
        let mut hi = if r.is_finite() { r.ln() } else { 1.0 };
        let above_at_l = self.eval(l) > lambda;
        let above = |s: f64| self.eval(s.exp()) > lambda;
        if l <= 0.0 {
            lo = hi.min(0.0) - 1.0;
            while above(lo) != above_at_l && lo > -745.0 {
                lo *= 2.0;
            }
        }
        if !r.is_finite() {
            hi = lo.max(0.0) + 1.0;
            while above(hi) == above_at_l && hi < 709.0 {
                hi = hi * 2.0 + 1.0;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if above(mid) == above_at_l {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (0.5 * (lo + hi)).exp()
    }
}

/// `∫_{x0}^{x1} t^a dt` with the divergent cases mapped to `+∞`.
pub fn power_integral(a: f64, x0: f64, x1: f64) -> f64 {
    if !(x1 > x0) {
        return 0.0;
    }
    let k = a + 1.0;
    if x0 == 0.0 && k <= 0.0 {
        return f64::INFINITY;
    }
    if !x1.is_finite() && k >= 0.0 {
        return f64::INFINITY;
    }
    if x0 == 0.0 {
        return x1.powf(k) / k;
    }
    if !x1.is_finite() {
        return -x0.powf(k) / k;
    }
    let ln_ratio = (x1 / x0).ln();
    if k == 0.0 {
        return ln_ratio;
    }
    // x0^k (e^{k ln(x1/x0)} - 1) / k without cancellation near k = 0
    let v = x0.powf(k) * (k * ln_ratio).exp_m1() / k;
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// `∫_{s0}^{s1} exp(pre + κσ)·σ^b dσ` for `1 ≤ s0 ≤ s1 ≤ ∞`.
fn exp_power_integral(pre: f64, kappa: f64, b: f64, s0: f64, s1: f64) -> f64 {
    if !(s1 > s0) {
        return 0.0;
    }
    if !s1.is_finite() && !(kappa < 0.0 || (kappa == 0.0 && b < -1.0)) {
        return f64::INFINITY;
    }
    if kappa == 0.0 {
        let e = pre.exp();
        let k = b + 1.0;
        if k == 0.0 {
            return e * (s1.ln() - s0.ln());
        }
        if !s1.is_finite() {
            return e * (-s0.powf(k) / k);
        }
        return e * s0.powf(k) * (k * (s1 / s0).ln()).exp_m1() / k;
    }
    if b == 0.0 {
        if !s1.is_finite() {
            return -(pre + kappa * s0).exp() / kappa;
        }
        return (pre + kappa * s0).exp() * (kappa * (s1 - s0)).exp_m1() / kappa;
    }
    let g = |s: f64| (pre + kappa * s + b * s.ln()).exp();
    if s1.is_finite() {
        quad::integrate(g, s0, s1, REL_TOL)
    } else {
        quad::integrate_to_infinity(g, s0, REL_TOL)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_log;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn log_weight_on_unit_interval() {
        // ∫_0^1 (1 - log t) dt = 2
        let v = PowerLog::new(1.0, 0.0, 1.0).integral(0.0, 1.0);
        assert!(close(v, 2.0, 1e-10), "{v}");
    }

    #[test]
    fn pure_powers() {
        assert!(close(PowerLog::power(1.0, -2.0).integral(1.0, f64::INFINITY), 1.0, 1e-15));
        assert_eq!(PowerLog::power(1.0, -1.0).integral(0.0, 1.0), f64::INFINITY);
        assert_eq!(PowerLog::power(1.0, 0.0).integral(1.0, f64::INFINITY), f64::INFINITY);
        assert!(close(PowerLog::power(2.0, -1.0).integral(1.0, std::f64::consts::E), 2.0, 1e-15));
        assert!(close(PowerLog::power(1.0, -0.5).integral(0.0, 4.0), 4.0, 1e-15));
    }

    #[test]
    fn log_integrals_match_quadrature_oracle() {
        let cases = [
            (1.0, -0.5, 2.0, 0.01, 30.0),
            (3.0, 1.5, -1.0, 0.0, 5.0),
            (0.5, -2.5, 1.5, 0.2, f64::INFINITY),
            (1.0, -1.0, -2.0, 1.0, f64::INFINITY),
            (1.0, -1.0, -3.0, 0.0, 1.0),
        ];
        for (c, a, b, x0, x1) in cases {
            let p = PowerLog::new(c, a, b);
            let exact = p.integral(x0, x1);
            let oracle = integrate_log(|t| p.eval(t), x0, x1, 1e-12);
            assert!(close(exact, oracle, 1e-9), "{p:?} {exact} {oracle}");
        }
    }

    #[test]
    fn log_divergence() {
        assert_eq!(PowerLog::new(1.0, -1.0, -0.5).integral(1.0, f64::INFINITY), f64::INFINITY);
        assert_eq!(PowerLog::new(1.0, -1.0, 0.5).integral(0.0, 1.0), f64::INFINITY);
    }

    #[test]
    fn superlevel_of_inverse_square_root() {
        // t^{-1/2} > 2 on (0,1) iff t < 1/4
        let f = PowerLog::power(1.0, -0.5);
        let m = f.superlevel_measure(2.0, 0.0, 1.0);
        assert!(close(m, 0.25, 1e-12), "{m}");
        // grid counting cross-check
        let n = 200_000;
        let count = (0..n)
            .filter(|&i| f.eval((i as f64 + 0.5) / n as f64) > 2.0)
            .count();
        assert!((count as f64 / n as f64 - 0.25).abs() < 1e-4);
    }

    #[test]
    fn superlevel_of_nonmonotone_term() {
        // t^{-1} L^2 rises then falls on (1, ∞)
        let f = PowerLog::new(1.0, -1.0, 2.0);
        let lam = 1.2;
        let m = f.superlevel_measure(lam, 1.0, 100.0);
        let n = 400_000;
        let h = 99.0 / n as f64;
        let count = (0..n).filter(|&i| f.eval(1.0 + (i as f64 + 0.5) * h) > lam).count();
        assert!((m - count as f64 * h).abs() < 1e-3, "{m}");
    }

    #[test]
    fn monotonicity_certificate() {
        assert!(PowerLog::power(1.0, -2.0).is_nonincreasing_on(0.0, f64::INFINITY));
        assert!(!PowerLog::power(1.0, 0.5).is_nonincreasing_on(1.0, 2.0));
        // t^{-1} L^2 increases just beyond 1
        assert!(!PowerLog::new(1.0, -1.0, 2.0).is_nonincreasing_on(1.0, 10.0));
        assert!(PowerLog::new(1.0, -1.0, 2.0).is_nonincreasing_on(3.0, f64::INFINITY));
        // (1 - log t) is decreasing on (0,1)
        assert!(PowerLog::new(1.0, 0.0, 1.0).is_nonincreasing_on(0.0, 1.0));
    }
}
