//! Running maximum and first-passage time of the conditioned motion.
//!
//! For the meander conditioned above the barrier on `[0, t]`, the CDF of
//! `max_{[0, upto]}` is a band-kernel integral while `upto < t` and closes
//! into pure series at `upto == t`. Three evaluation routes cover the
//! parameter space for the barrier-started case:
//!
//! * `upto < t`: integral over the band-killed marginal times the forward
//!   weight (`route: integral`);
//! * `upto == t`: an image-charge series summed by parts so every term is
//!   a difference of scaled Gaussians and normal-CDF increments
//!   (`route: images` / `route: segments`, two algebraic arrangements of
//!   the same sum kept as mutual cross-checks);
//! * `upto == t`, level close to the barrier: all image terms cancel to
//!   within rounding, so the sum is replaced by its Poisson-resummed dual,
//!   whose terms are positive and decay like `exp(-pi^2 j^2 t / 2 L^2)`.
//!
//! First-passage: for `s <= t` survival of `T_x` *is* the max CDF at
//! `upto = s`. Past the conditioning horizon the path restarts as free
//! drifted motion from the horizon marginal restricted to `{max < x}`, so
//! the density is a one-dimensional integral against the Bachelier-Levy
//! kernel.

use crate::config::NumericsConfig;
use crate::error::{require_finite, Error, Result};
use crate::kernels::{
    band_density, half_gaussian_exp_integral, rayleigh_exp_normalizer, sum_bilateral,
    survival_probability, BandParams, KernelParams,
};
use crate::meander::{MeanderSpec, Start};
use crate::quad;
use crate::special::{ln_norm_cdf_diff, norm_cdf, rayleigh_tilt, SQRT_2PI};

/// `coef * exp(ln_rest)` assembled fully in log space; `coef` must be
/// non-negative (signs are applied by callers).
#[inline]
fn scaled_exp(coef: f64, ln_rest: f64) -> f64 {
    if coef == 0.0 || ln_rest == f64::NEG_INFINITY {
        0.0
    } else {
        (coef.ln() + ln_rest).exp()
    }
}

/// CDF query for the running maximum of the conditioned motion:
/// `P(max_{[0, upto]} < level)` under conditioning on `[0, spec.horizon]`.
#[derive(Debug, Clone, Copy)]
pub struct MaxQuery {
    pub spec: MeanderSpec,
    /// Level `x`; must exceed the barrier (and the start, when fixed).
    pub level: f64,
    /// Right end of the maximization window, in `(0, horizon]`.
    pub upto: f64,
}

impl MaxQuery {
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        require_finite(&[("level", self.level), ("upto", self.upto)])?;
        if self.level <= self.spec.barrier {
            return Err(Error::domain(format!(
                "level {} must lie strictly above the barrier {}",
                self.level, self.spec.barrier
            )));
        }
        if let Start::Above(u) = self.spec.start {
            if self.level <= u {
                return Err(Error::domain(format!(
                    "level {} must lie strictly above the start {}",
                    self.level, u
                )));
            }
        }
        if self.upto <= 0.0 || self.upto > self.spec.horizon {
            return Err(Error::domain(format!(
                "window end {} must lie in (0, {}]",
                self.upto, self.spec.horizon
            )));
        }
        Ok(())
    }
}

/// First-passage query past the conditioning horizon: density of `T_level`
/// at time `at > spec.horizon`, where the motion is conditioned above the
/// barrier on `[0, horizon]` and runs free afterwards.
#[derive(Debug, Clone, Copy)]
pub struct FptQuery {
    pub spec: MeanderSpec,
    pub level: f64,
    pub at: f64,
}

impl FptQuery {
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        require_finite(&[("level", self.level), ("at", self.at)])?;
        if self.level <= self.spec.barrier {
            return Err(Error::domain(format!(
                "level {} must lie strictly above the barrier {}",
                self.level, self.spec.barrier
            )));
        }
        if let Start::Above(u) = self.spec.start {
            if self.level <= u {
                return Err(Error::domain(format!(
                    "level {} must lie strictly above the start {}",
                    self.level, u
                )));
            }
        }
        if self.at <= self.spec.horizon {
            return Err(Error::domain(format!(
                "time {} must lie strictly past the horizon {}",
                self.at, self.spec.horizon
            )));
        }
        Ok(())
    }
}

/// `P(max_{[0, upto]} < level)` for the conditioned motion.
pub fn max_cdf(q: &MaxQuery, cfg: &NumericsConfig) -> Result<f64> {
    q.validate()?;
    cfg.validate()?;
    let t = q.spec.horizon;
    let v = q.spec.barrier;
    let mu = q.spec.mu;
    let s = q.upto;
    let x = q.level;
    match q.spec.start {
        Start::Above(u) => {
            let den = survival_probability(t, u, v, mu)?;
            if den <= 0.0 {
                return Err(Error::domain(
                    "conditioning event has vanishing probability at this precision".into(),
                ));
            }
            let num = quad::integrate(
                |y| {
                    let band =
                        band_density(&BandParams { s, u, y, v, upper: x, mu }, cfg).unwrap_or(0.0);
                    if band == 0.0 {
                        return 0.0;
                    }
                    let tail = if s == t {
                        1.0
                    } else {
                        survival_probability(t - s, y, v, mu).unwrap_or(0.0)
                    };
                    band * tail
                },
                v,
                x,
                cfg,
            )?
            .value;
            Ok((num / den).clamp(0.0, 1.0))
        }
        Start::AtBarrier => {
            if s < t {
                max_cdf_window_integral(t, s, x - v, mu, cfg)
            } else {
                let l = x - v;
                if l < 0.35 * t.sqrt() {
                    max_cdf_horizon_dual(t, l, mu, cfg)
                } else {
                    max_cdf_horizon_segments(t, l, mu, cfg)
                }
            }
        }
    }
}

/// Survival function of the first-passage time at `s <= horizon`:
/// `P(T_level > s)`, identical to the max CDF over `[0, s]`.
pub fn fpt_survival(spec: &MeanderSpec, level: f64, s: f64, cfg: &NumericsConfig) -> Result<f64> {
    max_cdf(&MaxQuery { spec: *spec, level, upto: s }, cfg)
}

///// Barrier-started window route (`upto < horizon`): integral over the
/// band-killed marginal with the forward exponential weight.
fn max_cdf_window_integral(
    t: f64,
    s: f64,
    l: f64,
    mu: f64,
    cfg: &NumericsConfig,
) -> Result<f64> {
    let tau = t - s;
    let n = rayleigh_exp_normalizer(t, mu)?;
    if !n.is_finite() {
        return Err(Error::domain(
            "drift-horizon combination overflows the linear-space normalizer".into(),
        ));
    }
    let scale = (t / s).powf(1.5) / n;
    let tol = cfg.series_tol;
    let max_terms = cfg.series_max_terms;
    let integrand = |a: f64| {
        let images = sum_bilateral(
            |k| {
                let w = a - 2.0 * k as f64 * l;
                w * (-0.5 * w * w / s).exp()
            },
            tol,
            max_terms,
        )
        .unwrap_or(f64::NAN);
        let weight = half_gaussian_exp_integral(a, tau, mu).unwrap_or(f64::NAN);
        scale * images * weight
    };
    let value = quad::integrate(integrand, 0.0, l, cfg)?.value;
    Ok(value.clamp(0.0, 1.0))
}

/// Horizon route, image form: `sum_k [E_k - e^{mu L} O_k + mu-tilt term]`
/// over the reflection group, divided by the Rayleigh normalizer.
/// Kept as an independent arrangement for cross-checking `segments`.
pub(crate) fn max_cdf_horizon_images(
    t: f64,
    l: f64,
    mu: f64,
    cfg: &NumericsConfig,
) -> Result<f64> {
    require_finite(&[("t", t), ("l", l), ("mu", mu)])?;
    if t <= 0.0 || l <= 0.0 {
        return Err(Error::domain("t and the level offset must be positive".into()));
    }
    let rt = t.sqrt();
    let z = mu * rt;
    let r = rayleigh_tilt(z);
    if !r.is_finite() {
        return Err(Error::domain(
            "drift-horizon combination overflows the linear-space normalizer".into(),
        ));
    }
    let sum = sum_bilateral(
        |k| {
            let kf = k as f64;
            let even = (-2.0 * (kf * l) * (kf * l) / t).exp();
            let odd = (mu * l - 0.5 * (2.0 * kf - 1.0).powi(2) * l * l / t).exp();
            // Tilt term: mu sqrt(2 pi t) e^{2 k mu L + z^2/2} (Phi(hi) - Phi(lo))
            // with lo = -2kL/rt - z, hi = (1-2k)L/rt - z; assembled in log
            // space because e^{z^2/2} alone can overflow while the product
            // stays bounded by the Gaussian decay in k.
            let lo = -2.0 * kf * l / rt - z;
            let hi = (1.0 - 2.0 * kf) * l / rt - z;
            let ln_diff = ln_norm_cdf_diff(lo, hi);
            let tilt = mu.signum()
                * scaled_exp(mu.abs() * SQRT_2PI * rt, 2.0 * kf * mu * l + 0.5 * z * z + ln_diff);
            even - odd + tilt
        },
        cfg.series_tol,
        cfg.series_max_terms,
    )?;
    Ok((sum / r).clamp(0.0, 1.0))
}

/// Horizon route, summed-by-parts form (barrier at zero after translation):
/// `[A - e^{mu L} B + mu * segment integrals] / R`, where the segment
/// integrals fold the tilt `exp(mu rho(w))` of the reflected distance
/// `rho(w)` (a triangle wave) against the Gaussian, segment by segment.
pub(crate) fn max_cdf_horizon_segments(
    t: f64,
    l: f64,
    mu: f64,
    cfg: &NumericsConfig,
) -> Result<f64> {
    require_finite(&[("t", t), ("l", l), ("mu", mu)])?;
    if t <= 0.0 || l <= 0.0 {
        return Err(Error::domain("t and the level offset must be positive".into()));
    }
    let rt = t.sqrt();
    let z = mu * rt;
    let r = rayleigh_tilt(z);
    if !r.is_finite() {
        return Err(Error::domain(
            "drift-horizon combination overflows the linear-space normalizer".into(),
        ));
    }
    let tol = cfg.series_tol;
    let cap = cfg.series_max_terms;

    // A - e^{mu L} B: the driftless alternating image sum with the single
    // endpoint tilt.
    let theta = sum_bilateral(
        |k| {
            let kf = k as f64;
            (-2.0 * (kf * l) * (kf * l) / t).exp()
                - (mu * l - 0.5 * (2.0 * kf - 1.0).powi(2) * l * l / t).exp()
        },
        tol,
        cap,
    )?;

    // mu * integral_0^inf e^{-w^2/2t} e^{mu rho(w)} dw, segment by segment:
    // on [jL, (j+1)L] the folded distance rho is linear with slope +-1.
    let mut c_sum = 0.0;
    let mut small_run = 0usize;
    let mut j = 0usize;
    loop {
        let jf = j as f64;
        let seg = if j % 2 == 0 {
            // rho(w) = w - jL
            let ln_diff = ln_norm_cdf_diff(jf * l / rt - z, (jf + 1.0) * l / rt - z);
            scaled_exp(SQRT_2PI * rt, -jf * l * mu + 0.5 * z * z + ln_diff)
        } else {
            // rho(w) = (j+1)L - w
            let ln_diff = ln_norm_cdf_diff(jf * l / rt + z, (jf + 1.0) * l / rt + z);
            scaled_exp(SQRT_2PI * rt, (jf + 1.0) * l * mu + 0.5 * z * z + ln_diff)
        };
        c_sum += seg;
        if seg.abs() < tol * (1.0 + c_sum.abs()) {
            small_run += 1;
            if small_run >= 2 {
                break;
            }
        } else {
            small_run = 0;
        }
        j += 1;
        if j >= cap {
            return Err(Error::SeriesConvergence { max_terms: cap, last_term: seg });
        }
    }

    Ok(((theta + mu * c_sum) / r).clamp(0.0, 1.0))
}

/// Horizon route near the barrier: Poisson-resummed dual of the image
/// series, with positive terms decaying like `exp(-pi^2 j^2 t / (2 L^2))`.
/// The direct image sum cancels to rounding noise in this regime; the dual
/// keeps full relative accuracy down to CDF values far below underflow of
/// any individual image term.
pub(crate) fn max_cdf_horizon_dual(t: f64, l: f64, mu: f64, cfg: &NumericsConfig) -> Result<f64> {
    require_finite(&[("t", t), ("l", l), ("mu", mu)])?;
    if t <= 0.0 || l <= 0.0 {
        return Err(Error::domain("t and the level offset must be positive".into()));
    }
    let rt = t.sqrt();
    let z = mu * rt;
    let r = rayleigh_tilt(z);
    if !r.is_finite() {
        return Err(Error::domain(
            "drift-horizon combination overflows the linear-space normalizer".into(),
        ));
    }
    let pi = std::f64::consts::PI;
    let mut sum = 0.0;
    let mut small_run = 0usize;
    for j in 1..=cfg.series_max_terms {
        let jf = j as f64;
        let p2j2 = pi * pi * jf * jf;
        let damp = (-0.5 * p2j2 * t / (l * l)).exp();
        let sign_factor = if j % 2 == 1 {
            1.0 + (mu * l).exp()
        } else {
            1.0 - (mu * l).exp()
        };
        let term = damp * p2j2 / (p2j2 + mu * mu * l * l) * sign_factor;
        sum += term;
        if term.abs() < cfg.series_tol * (1.0 + sum.abs()) {
            small_run += 1;
            if small_run >= 2 {
                break;
            }
        } else {
            small_run = 0;
        }
        if j == cfg.series_max_terms {
            return Err(Error::SeriesConvergence { max_terms: cfg.series_max_terms, last_term: term });
        }
    }
    Ok((SQRT_2PI * rt / l * sum / r).clamp(0.0, 1.0))
}

/// Density of the first-passage time to `level` at `at > horizon`: the
/// horizon marginal restricted to `{max_{[0, horizon]} < level}` pushed
/// through the free drifted first-passage kernel.
pub fn fpt_density_post_horizon(q: &FptQuery, cfg: &NumericsConfig) -> Result<f64> {
    q.validate()?;
    cfg.validate()?;
    let t = q.spec.horizon;
    let v = q.spec.barrier;
    let mu = q.spec.mu;
    let x = q.level;
    let sigma = q.at - t;

    // Bachelier-Levy density of first passage from 0 to d > 0 under drift mu.
    let bl = move |d: f64| {
        let e = d - mu * sigma;
        d * (-0.5 * e * e / sigma).exp() / (SQRT_2PI * sigma.powf(1.5))
    };

    match q.spec.start {
        Start::Above(u) => {
            let den = survival_probability(t, u, v, mu)?;
            if den <= 0.0 {
                return Err(Error::domain(
                    "conditioning event has vanishing probability at this precision".into(),
                ));
            }
            let value = quad::integrate(
                |y| {
                    let w = band_density(&BandParams { s: t, u, y, v, upper: x, mu }, cfg)
                        .unwrap_or(0.0);
                    w * bl(x - y)
                },
                v,
                x,
                cfg,
            )?
            .value;
            Ok((value / den).max(0.0))
        }
        Start::AtBarrier => {
            let l = x - v;
            let n = rayleigh_exp_normalizer(t, mu)?;
            if !n.is_finite() {
                return Err(Error::domain(
                    "drift-horizon combination overflows the linear-space normalizer".into(),
                ));
            }
            let tol = cfg.series_tol;
            let cap = cfg.series_max_terms;
            let value = quad::integrate(
                |a: f64| {
                    // Weight of the horizon value restricted to max < level:
                    // e^{mu a} sum_k w_k e^{-w_k^2 / 2t} / N.
                    let images = sum_bilateral(
                        |k| {
                            let w = a - 2.0 * k as f64 * l;
                            w * (-0.5 * w * w / t).exp()
                        },
                        tol,
                        cap,
                    )
                    .unwrap_or(f64::NAN);
                    (mu * a).exp() * images / n * bl(l - a)
                },
                0.0,
                l,
                cfg,
            )?
            .value;
            Ok(value.max(0.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cfg() -> NumericsConfig {
        NumericsConfig::default()
    }

    fn barrier_spec(mu: f64, v: f64, t: f64) -> MeanderSpec {
        MeanderSpec::new(mu, v, Start::AtBarrier, t).unwrap()
    }

    #[test]
    fn driftless_horizon_cdf_matches_hand_rolled_theta_sum() {
        // Independent oracle: CDF = sum_r (-1)^r exp(-r^2 L^2 / (2 t)).
        let t = 1.3;
        for &l in &[0.5, 1.0, 2.0, 3.5] {
            let mut oracle = 1.0;
            for rr in 1..200 {
                let rf = rr as f64;
                let e = (-0.5 * rf * rf * l * l / t).exp();
                oracle += 2.0 * if rr % 2 == 0 { e } else { -e };
            }
            let images = max_cdf_horizon_images(t, l, 0.0, &cfg()).unwrap();
            let segments = max_cdf_horizon_segments(t, l, 0.0, &cfg()).unwrap();
            assert_relative_eq!(images, oracle, max_relative = 1e-12, epsilon = 1e-14);
            assert_relative_eq!(segments, oracle, max_relative = 1e-12, epsilon = 1e-14);
        }
    }

    #[test]
    fn horizon_routes_agree_with_drift() {
        for &mu in &[-2.0, -0.5, 0.4, 1.5] {
            for &t in &[0.5, 1.0, 4.0] {
                for &lfrac in &[0.45, 0.8, 1.5, 3.0] {
                    let l = lfrac * t.sqrt();
                    let a = max_cdf_horizon_images(t, l, mu, &cfg()).unwrap();
                    let b = max_cdf_horizon_segments(t, l, mu, &cfg()).unwrap();
                    assert!(
                        (a - b).abs() < 1e-10,
                        "images {a} vs segments {b} at mu={mu} t={t} l={l}"
                    );
                }
            }
        }
    }

    #[test]
    fn dual_matches_segments_in_the_overlap() {
        for &mu in &[-1.5, 0.0, 0.9] {
            for &t in &[0.5, 2.0] {
                for &lfrac in &[0.3, 0.34, 0.4, 0.5] {
                    let l = lfrac * t.sqrt();
                    let dual = max_cdf_horizon_dual(t, l, mu, &cfg()).unwrap();
                    let seg = max_cdf_horizon_segments(t, l, mu, &cfg()).unwrap();
                    assert!(
                        (dual - seg).abs() < 1e-10,
                        "dual {dual} vs segments {seg} at mu={mu} t={t} lfrac={lfrac}"
                    );
                }
            }
        }
    }

    #[test]
    fn near_barrier_levels_stay_clean() {
        for &mu in &[-2.0, 0.0, 2.0] {
            for &t in &[0.5, 1.0, 4.0] {
                let q = MaxQuery {
                    spec: barrier_spec(mu, 0.0, t),
                    level: 0.01 * t.sqrt(),
                    upto: t,
                };
                let p = max_cdf(&q, &cfg()).unwrap();
                assert!(p.is_finite() && (0.0..=1e-6).contains(&p), "p = {p} at mu={mu} t={t}");
            }
        }
    }

    #[test]
    fn window_route_converges_to_horizon_route() {
        for &(t, v, mu, lfrac) in
            &[(1.0, 0.0, 0.8, 1.0), (2.0, 0.5, -0.7, 0.6), (0.5, -1.0, 0.0, 2.0)]
        {
            let l = lfrac * t.sqrt();
            let spec = barrier_spec(mu, v, t);
            let near = max_cdf(
                &MaxQuery { spec, level: v + l, upto: t * (1.0 - 1e-5) },
                &cfg(),
            )
            .unwrap();
            let horizon = max_cdf(&MaxQuery { spec, level: v + l, upto: t }, &cfg()).unwrap();
            assert!(
                (near - horizon).abs() < 1e-4,
                "window {near} vs horizon {horizon} at t={t} v={v} mu={mu}"
            );
        }
    }

    #[test]
    fn window_route_gap_shrinks_geometrically() {
        // The window CDF differs from the horizon CDF by the first-passage
        // mass of the remaining sliver, which is O(tau); halving exponents
        // k = 2..5 must therefore shrink the gap and land below 1e-6.
        for &(t, v, mu, lfrac) in &[(1.0, 0.0, 0.8, 1.0), (2.0, 0.5, -0.7, 0.8)] {
            let spec = barrier_spec(mu, v, t);
            let level = v + lfrac * t.sqrt();
            let horizon = max_cdf(&MaxQuery { spec, level, upto: t }, &cfg()).unwrap();
            let mut prev = f64::INFINITY;
            let mut last_gap = f64::INFINITY;
            for k in 2..=5 {
                let s = t * (1.0 - 10f64.powi(-k));
                let w = max_cdf(&MaxQuery { spec, level, upto: s }, &cfg()).unwrap();
                let gap = (w - horizon).abs();
                assert!(gap < prev, "gap not decreasing at k={k}: {gap} vs {prev}");
                prev = gap;
                last_gap = gap;
            }
            assert!(last_gap < 1e-6, "final gap {last_gap} at t={t} v={v} mu={mu}");
        }
    }

    #[test]
    fn above_start_cdf_reaches_one_and_zero() {
        let spec = MeanderSpec::new(0.5, 0.0, Start::Above(0.2), 1.0).unwrap();
        let hi = max_cdf(&MaxQuery { spec, level: 12.0, upto: 1.0 }, &cfg()).unwrap();
        assert_relative_eq!(hi, 1.0, epsilon = 1e-9);
        let lo = max_cdf(&MaxQuery { spec, level: 0.200001, upto: 1.0 }, &cfg()).unwrap();
        assert!(lo < 1e-3, "lo = {lo}");
    }

    #[test]
    fn above_start_horizon_max_matches_band_mass_oracle() {
        // P(max < x | min > v) = integral of the band density at s = t over
        // (v, x), divided by the one-sided survival; compare the dispatch
        // route against a plainly coded quadrature of the same object.
        let (t, v, u, x, mu) = (1.0, 0.0, 0.2, 1.0, 0.8);
        let spec = MeanderSpec::new(mu, v, Start::Above(u), t).unwrap();
        let direct = max_cdf(&MaxQuery { spec, level: x, upto: t }, &cfg()).unwrap();
        let num = quad::integrate(
            |y| {
                band_density(&BandParams { s: t, u, y, v, upper: x, mu }, &cfg()).unwrap_or(0.0)
            },
            v,
            x,
            &cfg(),
        )
        .unwrap()
        .value;
        let oracle = num / survival_probability(t, u, v, mu).unwrap();
        assert_relative_eq!(direct, oracle, max_relative = 1e-10);
    }

    #[test]
    fn fpt_survival_is_the_max_cdf() {
        let spec = barrier_spec(0.5, 0.0, 1.0);
        let a = fpt_survival(&spec, 1.0, 0.7, &cfg()).unwrap();
        let b = max_cdf(&MaxQuery { spec, level: 1.0, upto: 0.7 }, &cfg()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn post_horizon_mass_accounting() {
        // integral_t^inf f_T(s) ds + P(T <= t) = 1 for mu >= 0 (passage is
        // certain); for mu < 0 the deficit equals the never-passage mass.
        let cfg = cfg();
        for &(mu, start) in &[
            (0.5, Start::AtBarrier),
            (0.0, Start::Above(0.2)),
            (-0.6, Start::Above(0.2)),
        ] {
            let spec = MeanderSpec::new(mu, 0.0, start, 1.0).unwrap();
            let x = 1.0;
            let p_before = 1.0 - fpt_survival(&spec, x, 1.0, &cfg).unwrap();
            let mut loose = cfg;
            loose.quad_abs_tol = 1e-10;
            loose.quad_rel_tol = 1e-8;
            let tail_mass = quad::integrate_semi_infinite(
                |at| {
                    fpt_density_post_horizon(&FptQuery { spec, level: x, at }, &loose)
                        .unwrap_or(0.0)
                },
                1.0 + 1e-12,
                4.0 / (1.0 + mu * mu),
                &loose,
            )
            .unwrap()
            .value;
            let total = p_before + tail_mass;
            if mu >= 0.0 {
                assert!((total - 1.0).abs() < 1e-5, "mu={mu}: total {total}");
            } else {
                // Deficit oracle: the horizon weight times the free
                // never-passage probability 1 - e^{2 mu d}.
                let den = survival_probability(1.0, 0.2, 0.0, mu).unwrap();
                let deficit = quad::integrate(
                    |y| {
                        let w = band_density(
                            &BandParams { s: 1.0, u: 0.2, y, v: 0.0, upper: x, mu },
                            &cfg,
                        )
                        .unwrap_or(0.0);
                        w * -libm::expm1(2.0 * mu * (x - y))
                    },
                    0.0,
                    x,
                    &cfg,
                )
                .unwrap()
                .value
                    / den;
                assert!(
                    (total + deficit - 1.0).abs() < 1e-5,
                    "mu={mu}: total {total} deficit {deficit}"
                );
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn max_cdf_is_monotone_in_level(
            mu in -1.5f64..1.5, t in 0.3f64..2.0,
            l1 in 0.05f64..2.0, dl in 0.05f64..1.0, sfrac in 0.3f64..1.0
        ) {
            let spec = barrier_spec(mu, 0.0, t);
            let s = sfrac * t;
            let a = max_cdf(&MaxQuery { spec, level: l1 * t.sqrt(), upto: s }, &cfg()).unwrap();
            let b = max_cdf(&MaxQuery { spec, level: (l1 + dl) * t.sqrt(), upto: s }, &cfg()).unwrap();
            prop_assert!(b >= a - 1e-9, "monotonicity violated: {} then {}", a, b);
        }

        #[test]
        fn max_cdf_is_monotone_in_window(
            mu in -1.5f64..1.5, t in 0.3f64..2.0,
            lfrac in 0.4f64..2.0, s1 in 0.2f64..0.6, s2 in 0.65f64..1.0
        ) {
            let spec = barrier_spec(mu, 0.0, t);
            let l = lfrac * t.sqrt();
            let early = max_cdf(&MaxQuery { spec, level: l, upto: s1 * t }, &cfg()).unwrap();
            let late = max_cdf(&MaxQuery { spec, level: l, upto: s2 * t }, &cfg()).unwrap();
            prop_assert!(late <= early + 1e-9, "window monotonicity violated: {} then {}", early, late);
        }

        #[test]
        fn post_horizon_density_is_nonnegative_and_finite(
            mu in -1.0f64..1.0, lfrac in 0.4f64..2.5, at in 1.0001f64..4.0
        ) {
            let spec = barrier_spec(mu, 0.0, 1.0);
            let f = fpt_density_post_horizon(
                &FptQuery { spec, level: lfrac, at },
                &cfg(),
            ).unwrap();
            prop_assert!(f.is_finite() && f >= 0.0);
        }
    }
}
