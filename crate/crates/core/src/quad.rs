//! Adaptive Gauss–Kronrod quadrature, plain and on a logarithmic scale.
//!
//! Integrals over `(0, ∞)` of power-like integrands are computed after the
//! substitution `t = e^s`; unbounded `s`-ranges are folded onto a finite
//! interval with `s = s0 ± u/(1-u)`.

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Default relative tolerance for every adaptive integral in the crate.
pub const REL_TOL: f64 = 1e-10;

const MAX_SEGMENTS: usize = 4000;

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[10];
    let mut gauss = 0.0;
    for j in 0..10 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).abs())
}

/// Integrates `f` over the finite interval `[a, b]` to relative tolerance `rel`.
///
/// Returns `f64::INFINITY` if the integrand produces non-finite values.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let (v, e) = gk21(&f, a, b);
    if !v.is_finite() {
        return f64::INFINITY;
    }
    let mut segs = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > rel * total.abs().max(1e-300) && segs.len() < MAX_SEGMENTS {
        // split the segment with the largest error estimate
        let (idx, _) = segs
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, s)| if s.3 > acc.1 { (i, s.3) } else { acc });
        let (sa, sb, sv, se) = segs.swap_remove(idx);
        let mid = 0.5 * (sa + sb);
        if mid <= sa || mid >= sb {
            segs.push((sa, sb, sv, 0.0));
            err -= se;
            continue;
        }
        let (v1, e1) = gk21(&f, sa, mid);
        let (v2, e2) = gk21(&f, mid, sb);
        if !(v1.is_finite() && v2.is_finite()) {
            return f64::INFINITY;
        }
        total += v1 + v2 - sv;
        err += e1 + e2 - se;
        segs.push((sa, mid, v1, e1));
        segs.push((mid, sb, v2, e2));
    }
    // re-sum to shed accumulated cancellation in `total`
    segs.iter().map(|s| s.2).sum()
}

/// Integrates `g` over `[s0, ∞)` by folding onto `[0, 1)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(g: F, s0: f64, rel: f64) -> f64 {
    integrate(
        |u: f64| {
            if u >= 1.0 {
                return 0.0;
            }
            let d = 1.0 - u;
            let v = g(s0 + u / d);
            if v == 0.0 {
                0.0
            } else {
                v / (d * d)
            }
        },
        0.0,
        1.0,
        rel,
    )
}

/// Integrates `f(t)` over `(x0, x1) ⊂ (0, ∞]` using `t = e^s`.
///
/// `x0` may be zero and `x1` may be infinite.
pub fn integrate_log<F: Fn(f64) -> f64>(f: F, x0: f64, x1: f64, rel: f64) -> f64 {
    if !(x1 > x0) {
        return 0.0;
    }
    let g = |s: f64| {
        let t = s.exp();
        if t == 0.0 || !t.is_finite() {
            return 0.0;
        }
        f(t) * t
    };
    match (x0 > 0.0, x1.is_finite()) {
        (true, true) => integrate(g, x0.ln(), x1.ln(), rel),
        (true, false) => integrate_to_infinity(g, x0.ln(), rel),
        (false, true) => integrate_to_infinity(|s| g(-s), -x1.ln(), rel),
        (false, false) => {
            integrate_to_infinity(|s| g(-s), 0.0, rel) + integrate_to_infinity(g, 0.0, rel)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, REL_TOL);
        assert!((v - 0.0).abs() < 1e-13);
        let v = integrate(|x| x.powi(4), -1.0, 3.0, REL_TOL);
        assert!((v - (243.0 + 1.0) / 5.0).abs() < 1e-11);
    }

    #[test]
    fn log_scale_improper() {
        // ∫_0^1 (1 - log t) dt = 2
        let v = integrate_log(|t| 1.0 - t.ln(), 0.0, 1.0, REL_TOL);
        assert!((v - 2.0).abs() < 1e-9, "{v}");
        // ∫_1^∞ t^-2 dt = 1
        let v = integrate_log(|t| t.powi(-2), 1.0, f64::INFINITY, REL_TOL);
        assert!((v - 1.0).abs() < 1e-9, "{v}");
        // ∫_0^∞ min(1, t^-2) dt = 2
        let v = integrate_log(|t| (t * t).recip().min(1.0), 0.0, f64::INFINITY, REL_TOL);
        assert!((v - 2.0).abs() < 1e-8, "{v}");
    }
}
