//! Adaptive Gauss-Kronrod quadrature.
//!
//! A 21-point Kronrod rule with embedded 10-point Gauss rule supplies a
//! per-interval error estimate; the adaptive driver repeatedly bisects the
//! subinterval with the largest estimate until the summed estimate meets
//! the requested tolerance. Integrands here are smooth away from interval
//! endpoints (the Kronrod nodes are interior, so integrable endpoint
//! singularities are never sampled).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::config::NumericsConfig;
use crate::error::{Error, Result};

/// Kronrod abscissae on [0, 1] (symmetric about the midpoint).
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

/// Kronrod weights matching `XGK`.
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

/// Gauss weights for the embedded 10-point rule (odd-indexed abscissae).
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    /// Estimated absolute error of `value`.
    pub error: f64,
    /// Number of subintervals in the final partition.
    pub intervals: usize,
}

/// One GK21 panel: returns (integral, error estimate).
fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(centre);
    let mut resk = WGK[10] * fc;
    let mut resg = 0.0;
    let mut resabs = resk.abs();

    let mut fv = [0.0_f64; 21]; // symmetric pairs for the resasc pass
    fv[20] = fc;
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        fv[j] = f1;
        fv[10 + j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv[j] - mean).abs() + (fv[10 + j] - mean).abs());
    }

    let result = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * 1.0_f64.min((200.0 * err / resasc).powf(1.5));
    }
    let round = 50.0 * f64::EPSILON * resabs;
    if round > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(round);
    }
    (result, err)
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive integral of `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &NumericsConfig) -> Result<QuadResult> {
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain(format!("integration bounds must be finite, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, intervals: 0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let (v0, e0) = gk21(&f, lo, hi);
    if !v0.is_finite() {
        return Err(Error::domain("integrand produced a non-finite value".into()));
    }
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a: lo, b: hi, value: v0, error: e0 });
    let mut total_value = v0;
    let mut total_error = e0;

    for _ in 0..cfg.quad_max_levels {
        let target = cfg.quad_abs_tol.max(cfg.quad_rel_tol * total_value.abs());
        if total_error <= target {
            break;
        }
        let worst = heap.pop().expect("heap cannot be empty while error > 0");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval shrank to machine width; keep its estimate and stop
            // splitting it by pushing it back with zeroed error.
            total_error -= worst.error;
            heap.push(Segment { error: 0.0, ..worst });
            continue;
        }
        let (v1, e1) = gk21(&f, worst.a, mid);
        let (v2, e2) = gk21(&f, mid, worst.b);
        if !(v1.is_finite() && v2.is_finite()) {
            return Err(Error::domain("integrand produced a non-finite value".into()));
        }
        total_value += v1 + v2 - worst.value;
        total_error += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
    }

    let target = cfg.quad_abs_tol.max(cfg.quad_rel_tol * total_value.abs());
    if total_error > target {
        return Err(Error::QuadConvergence {
            estimate: total_error,
            intervals: heap.len(),
            target,
        });
    }
    Ok(QuadResult { value: sign * total_value, error: total_error, intervals: heap.len() })
}

/// Adaptive integral of `f` over `[lower, inf)` via the rational map
/// `w = lower + scale * z / (1 - z)`, `z` in `[0, 1)`.
///
/// `scale` sets where the map places its resolution (half the quadrature
/// nodes land in `[lower, lower + scale]`); correctness does not depend on
/// it, only efficiency.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(
    f: F,
    lower: f64,
    scale: f64,
    cfg: &NumericsConfig,
) -> Result<QuadResult> {
    if !lower.is_finite() {
        return Err(Error::domain(format!("lower bound must be finite, got {lower}")));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::domain(format!("map scale must be positive, got {scale}")));
    }
    let g = move |z: f64| {
        let om = 1.0 - z;
        let w = lower + scale * z / om;
        let jac = scale / (om * om);
        let val = f(w) * jac;
        // Integrable tails reach the far nodes as underflow-times-overflow;
        // treat that as zero rather than poisoning the sum.
        if val.is_nan() && !w.is_finite() {
            0.0
        } else {
            val
        }
    };
    integrate(g, 0.0, 1.0, cfg)
}
