//! Gaussian transition kernels for drifted Brownian motion killed at a
//! barrier, plus the scalar integrals the conditioned laws are built from.
//!
//! Conventions used throughout the crate: the motion has drift `mu`, the
//! barrier sits at level `v`, paths start at `u > v`, and densities are in
//! the space variable `y > v`. Time arguments are always strictly positive.
//!
//! The one-barrier kernel (`absorbed_density`) and the survival probability
//! have closed forms. Two-barrier ("band") kernels are image-charge series;
//! with nonzero drift every image carries the *same* Girsanov weight
//! `exp(mu (y - u) - mu^2 s / 2)`, because the change of measure depends on
//! the endpoints and elapsed time only, not on the reflection history. The
//! factored form also keeps both boundary conditions exact: the driftless
//! series vanishes at `v` and at the upper wall, and a scalar multiple
//! still does.

use crate::config::NumericsConfig;
use crate::error::{require_finite, Error, Result};
use crate::quad;
use crate::special::{
    exp_scaled_norm_cdf, ln1mexp, ln_norm_cdf, ln_rayleigh_tilt, norm_cdf, rayleigh_tilt,
    FRAC_1_SQRT_2PI, SQRT_2PI,
};

/// Arguments of the one-barrier kernel: elapsed time `s`, start `u`, end
/// `y`, barrier `v`, drift `mu`.
#[derive(Debug, Clone, Copy)]
pub struct KernelParams {
    pub s: f64,
    pub u: f64,
    pub y: f64,
    pub v: f64,
    pub mu: f64,
}

impl KernelParams {
    pub fn new(s: f64, u: f64, y: f64, v: f64, mu: f64) -> Result<Self> {
        let p = KernelParams { s, u, y, v, mu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        require_finite(&[
            ("s", self.s),
            ("u", self.u),
            ("y", self.y),
            ("v", self.v),
            ("mu", self.mu),
        ])?;
        if self.s <= 0.0 {
            return Err(Error::domain(format!("elapsed time s must be positive, got {}", self.s)));
        }
        if self.u <= self.v {
            return Err(Error::domain(format!(
                "start u = {} must lie above the barrier v = {}",
                self.u, self.v
            )));
        }
        if self.y <= self.v {
            return Err(Error::domain(format!(
                "end y = {} must lie above the barrier v = {}",
                self.y, self.v
            )));
        }
        Ok(())
    }
}

/// Arguments of the two-barrier kernel: as [`KernelParams`] plus the upper
/// wall `upper`, with `v < u < upper` and `v < y < upper`.
#[derive(Debug, Clone, Copy)]
pub struct BandParams {
    pub s: f64,
    pub u: f64,
    pub y: f64,
    pub v: f64,
    pub upper: f64,
    pub mu: f64,
}

impl BandParams {
    pub fn new(s: f64, u: f64, y: f64, v: f64, upper: f64, mu: f64) -> Result<Self> {
        let p = BandParams { s, u, y, v, upper, mu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        KernelParams { s: self.s, u: self.u, y: self.y, v: self.v, mu: self.mu }.validate()?;
        require_finite(&[("upper", self.upper)])?;
        if self.upper <= self.u || self.upper <= self.y {
            return Err(Error::domain(format!(
                "upper wall {} must lie above start {} and end {}",
                self.upper, self.u, self.y
            )));
        }
        Ok(())
    }
}

/// Sums a bilateral series `sum_{k in Z} term(k)` by expanding outwards
/// `0, +1, -1, +2, -2, ...`, stopping once two consecutive terms fall below
/// `tol * (1 + |partial|)`.
pub(crate) fn sum_bilateral<F: FnMut(i64) -> f64>(
    mut term: F,
    tol: f64,
    max_terms: usize,
) -> Result<f64> {
    let mut total = term(0);
    let mut used = 1usize;
    let mut small_run = 0usize;
    let mut last = total;
    let mut k = 1i64;
    loop {
        for kk in [k, -k] {
            let t = term(kk);
            total += t;
            last = t;
            used += 1;
            if t.abs() < tol * (1.0 + total.abs()) {
                small_run += 1;
            } else {
                small_run = 0;
            }
            if small_run >= 2 {
                return Ok(total);
            }
        }
        if used >= max_terms {
            return Err(Error::SeriesConvergence { max_terms, last_term: last });
        }
        k += 1;
    }
}

/// Density at `y` of drifted Brownian motion started at `u`, killed at the
/// barrier `v`: the sub-probability kernel of the motion on `{min > v}`.
///
/// Computed as the free Gaussian density times the probability
/// `1 - exp(-2 (y - v)(u - v)/s)` that the pinned bridge stays clear of the
/// barrier, which is exact and stays accurate when the reflection term and
/// the direct term nearly cancel (both endpoints close to the barrier).
pub fn absorbed_density(p: &KernelParams) -> Result<f64> {
    p.validate()?;
    let z = (p.y - p.u - p.mu * p.s) / p.s.sqrt();
    let free = FRAC_1_SQRT_2PI * (-0.5 * z * z).exp() / p.s.sqrt();
    let clear = -libm::expm1(-2.0 * (p.y - p.v) * (p.u - p.v) / p.s);
    Ok(free * clear)
}

/// `ln` of [`absorbed_density`], finite whenever the density is positive,
/// usable far past the underflow threshold of the linear form.
pub fn ln_absorbed_density(p: &KernelParams) -> Result<f64> {
    p.validate()?;
    let z = (p.y - p.u - p.mu * p.s) / p.s.sqrt();
    let ln_free = -0.5 * z * z - 0.5 * (2.0 * std::f64::consts::PI * p.s).ln();
    Ok(ln_free + ln1mexp(-2.0 * (p.y - p.v) * (p.u - p.v) / p.s))
}

/// Probability that drifted Brownian motion started at `u` stays above the
/// barrier `v` throughout `[0, t]`:
/// `Phi((a + mu t)/sqrt t) - exp(-2 mu a) Phi((mu t - a)/sqrt t)`, `a = u - v`.
pub fn survival_probability(t: f64, u: f64, v: f64, mu: f64) -> Result<f64> {
    validate_survival_args(t, u, v, mu)?;
    let a = u - v;
    let rt = t.sqrt();
    let x1 = a / rt + mu * rt;
    let x2 = mu * rt - a / rt;
    // Factored as Phi(x1) (1 - exp(ln B - ln Phi(x1))) so the subtraction is
    // performed in log space; the two terms agree to leading order when the
    // survival probability is small (a -> 0 or strong negative drift).
    let ln_phi1 = ln_norm_cdf(x1);
    let ln_b = -2.0 * mu * a + ln_norm_cdf(x2);
    let ratio = (ln_b - ln_phi1).min(0.0);
    Ok((norm_cdf(x1) * -libm::expm1(ratio)).clamp(0.0, 1.0))
}

/// `ln` of [`survival_probability`].
pub fn ln_survival_probability(t: f64, u: f64, v: f64, mu: f64) -> Result<f64> {
    validate_survival_args(t, u, v, mu)?;
    let a = u - v;
    let rt = t.sqrt();
    let x1 = a / rt + mu * rt;
    let x2 = mu * rt - a / rt;
    let ln_phi1 = ln_norm_cdf(x1);
    let ln_b = -2.0 * mu * a + ln_norm_cdf(x2);
    Ok(ln_phi1 + ln1mexp((ln_b - ln_phi1).min(0.0)))
}

fn validate_survival_args(t: f64, u: f64, v: f64, mu: f64) -> Result<()> {
    require_finite(&[("t", t), ("u", u), ("v", v), ("mu", mu)])?;
    if t <= 0.0 {
        return Err(Error::domain(format!("horizon t must be positive, got {t}")));
    }
    if u <= v {
        return Err(Error::domain(format!("start u = {u} must lie above the barrier v = {v}")));
    }
    Ok(())
}

/// Sub-probability mass `P(B(s) in (v, y], min_[0,s] B > v)` for the motion
/// started at `u`; the closed-form partial integral of [`absorbed_density`].
pub fn absorbed_mass(s: f64, u: f64, y: f64, v: f64, mu: f64) -> Result<f64> {
    let p = KernelParams::new(s, u, y, v, mu)?;
    let rt = p.s.sqrt();
    let direct = crate::special::norm_cdf_diff((v - u - mu * s) / rt, (y - u - mu * s) / rt);
    let image = crate::special::norm_cdf_diff((u - v - mu * s) / rt, (y + u - 2.0 * v - mu * s) / rt);
    let m = direct - (-2.0 * mu * (u - v)).exp() * image;
    Ok(m.max(0.0))
}

/// Density of the motion killed at `v` *and* at the upper wall `upper`,
/// evaluated by the image-charge series
/// `exp(mu (y-u) - mu^2 s/2) * sum_k [phi_s(y-u-2kL) - phi_s(y+u-2v-2kL)]`
/// with `L = upper - v`. Reduces to [`absorbed_density`] as `upper -> inf`.
pub fn band_density(p: &BandParams, cfg: &NumericsConfig) -> Result<f64> {
    p.validate()?;
    cfg.validate()?;
    let tilt = (p.mu * (p.y - p.u) - 0.5 * p.mu * p.mu * p.s).exp();
    let sum = band_series(p, cfg.series_tol, cfg.series_max_terms)?;
    Ok((tilt * sum * FRAC_1_SQRT_2PI / p.s.sqrt()).max(0.0))
}

/// Driftless image sum `sum_k [e^{-(y-u-2kL)^2/2s} - e^{-(y+u-2v-2kL)^2/2s}]`.
fn band_series(p: &BandParams, tol: f64, max_terms: usize) -> Result<f64> {
    let l = p.upper - p.v;
    let d1 = p.y - p.u;
    let d2 = p.y + p.u - 2.0 * p.v;
    let inv2s = 0.5 / p.s;
    sum_bilateral(
        |k| {
            let shift = 2.0 * k as f64 * l;
            (-(d1 - shift) * (d1 - shift) * inv2s).exp() - (-(d2 - shift) * (d2 - shift) * inv2s).exp()
        },
        tol,
        max_terms,
    )
}

/// Partial band sum truncated at `|k| <= k_max`, exposed for truncation
/// error tests.
#[cfg(test)]
pub(crate) fn band_series_partial(p: &BandParams, k_max: i64) -> f64 {
    let l = p.upper - p.v;
    let d1 = p.y - p.u;
    let d2 = p.y + p.u - 2.0 * p.v;
    let inv2s = 0.5 / p.s;
    let mut sum = 0.0;
    for k in -k_max..=k_max {
        let shift = 2.0 * k as f64 * l;
        sum += (-(d1 - shift) * (d1 - shift) * inv2s).exp()
            - (-(d2 - shift) * (d2 - shift) * inv2s).exp();
    }
    sum
}

/// `I(a, tau, mu) = integral_0^inf [phi_tau(w - a) - phi_tau(w + a)] e^{mu w} dw`,
/// the exponential moment of the driftless kernel killed at zero, started
/// from `a`. This is the forward-looking weight the meander marginals carry.
///
/// Closed form: with `z = mu sqrt(tau)` and `c = a / sqrt(tau)`,
/// `I = exp(z^2/2) [e^{mu a} Phi(z + c) - e^{-mu a} Phi(z - c)]`, evaluated
/// as `[escn(z + c) - escn(z - c)] exp(-c^2/2)` so each factor stays scaled.
/// When even that overflows, the Girsanov identity
/// `I = exp(mu a + mu^2 tau / 2) * survival(tau, a, 0, mu)` (for `a > 0`)
/// is evaluated in log space. Odd in `a`.
pub fn half_gaussian_exp_integral(a: f64, tau: f64, mu: f64) -> Result<f64> {
    require_finite(&[("a", a), ("tau", tau), ("mu", mu)])?;
    if tau <= 0.0 {
        return Err(Error::domain(format!("tau must be positive, got {tau}")));
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    let rt = tau.sqrt();
    let z = mu * rt;
    let c = a / rt;
    let primary = (-0.5 * c * c).exp() * (exp_scaled_norm_cdf(z + c) - exp_scaled_norm_cdf(z - c));
    if primary.is_finite() {
        return Ok(primary);
    }
    // Overflow fallback via the Girsanov identity
    // I(a, tau, mu) = exp(mu a + mu^2 tau / 2) * S(tau, a, 0, mu), valid for
    // a > 0; oddness extends it to a < 0.
    let sign = if a > 0.0 { 1.0 } else { -1.0 };
    let aa = a.abs();
    let ln_i = mu * aa + 0.5 * mu * mu * tau + ln_survival_probability(tau, aa, 0.0, mu)?;
    Ok(sign * ln_i.exp())
}

/// `ln` of [`half_gaussian_exp_integral`] for `a > 0`.
pub fn ln_half_gaussian_exp_integral(a: f64, tau: f64, mu: f64) -> Result<f64> {
    require_finite(&[("a", a), ("tau", tau), ("mu", mu)])?;
    if tau <= 0.0 {
        return Err(Error::domain(format!("tau must be positive, got {tau}")));
    }
    if a <= 0.0 {
        return Err(Error::domain(format!("a must be positive for the log form, got {a}")));
    }
    Ok(mu * a + 0.5 * mu * mu * tau + ln_survival_probability(tau, a, 0.0, mu)?)
}

/// Normalizer `N(t, mu) = integral_0^inf w e^{-w^2/(2t) + mu w} dw = t R(mu sqrt t)`
/// of the tilted Rayleigh endpoint density.
pub fn rayleigh_exp_normalizer(t: f64, mu: f64) -> Result<f64> {
    require_finite(&[("t", t), ("mu", mu)])?;
    if t <= 0.0 {
        return Err(Error::domain(format!("t must be positive, got {t}")));
    }
    Ok(t * rayleigh_tilt(mu * t.sqrt()))
}

/// `ln` of [`rayleigh_exp_normalizer`].
pub fn ln_rayleigh_exp_normalizer(t: f64, mu: f64) -> Result<f64> {
    require_finite(&[("t", t), ("mu", mu)])?;
    if t <= 0.0 {
        return Err(Error::domain(format!("t must be positive, got {t}")));
    }
    Ok(t.ln() + ln_rayleigh_tilt(mu * t.sqrt()))
}

/// Integral of `f` over `[lower, inf)`; thin wrapper over the adaptive
/// engine with the default resolution scale.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(
    f: F,
    lower: f64,
    cfg: &NumericsConfig,
) -> Result<f64> {
    Ok(quad::integrate_semi_infinite(f, lower, 1.0, cfg)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cfg() -> NumericsConfig {
        NumericsConfig::default()
    }

    #[test]
    fn absorbed_density_reference_value() {
        // s=1, u=1, y=1, v=0, mu=0: phi(0) (1 - e^{-2}) = (1 - e^{-2})/sqrt(2 pi).
        let p = KernelParams::new(1.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        let expect = (1.0 - (-2.0_f64).exp()) * FRAC_1_SQRT_2PI;
        assert_relative_eq!(absorbed_density(&p).unwrap(), expect, max_relative = 1e-15);
        assert_relative_eq!(expect, 0.344_947_104_638_383, max_relative = 1e-14);
    }

    #[test]
    fn absorbed_density_matches_reflection_form() {
        // Independent oracle: phi_s(y-u-mu s) - e^{-2 mu (u-v)} phi_s(y+u-2v-mu s).
        for &(s, u, y, v, mu) in &[
            (0.7, 1.3, 0.8, 0.1, 0.9),
            (2.0, 0.5, 2.5, 0.0, -1.2),
            (0.05, 1.0, 1.01, 0.9, 3.0),
        ] {
            let p = KernelParams::new(s, u, y, v, mu).unwrap();
            let rs = s.sqrt();
            let phi = |x: f64| FRAC_1_SQRT_2PI * (-0.5 * x * x / s).exp() / rs;
            let oracle = phi(y - u - mu * s) - (-2.0 * mu * (u - v)).exp() * phi(y + u - 2.0 * v - mu * s);
            assert_relative_eq!(absorbed_density(&p).unwrap(), oracle, max_relative = 1e-11);
        }
    }

    #[test]
    fn ln_absorbed_matches_linear_and_survives_underflow() {
        let p = KernelParams::new(0.5, 1.0, 2.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(
            ln_absorbed_density(&p).unwrap(),
            absorbed_density(&p).unwrap().ln(),
            max_relative = 1e-13
        );
        // Far endpoint: linear form underflows to 0, log form stays finite.
        let far = KernelParams::new(0.5, 1.0, 60.0, 0.0, 0.0).unwrap();
        assert_eq!(absorbed_density(&far).unwrap(), 0.0);
        assert!(ln_absorbed_density(&far).unwrap() < -3000.0);
    }

    #[test]
    fn survival_reference_values() {
        // mu = 0: P = 2 Phi(a/sqrt t) - 1.
        let s = survival_probability(1.0, 1.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(s, 2.0 * norm_cdf(1.0) - 1.0, max_relative = 1e-14);
        // Strong positive drift from far above the barrier: certainty.
        assert_relative_eq!(
            survival_probability(1.0, 10.0, 0.0, 2.0).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        // Start at the barrier limit: death is certain.
        assert!(survival_probability(1.0, 1e-14, 0.0, 0.5).unwrap() < 1e-13);
    }

    #[test]
    fn survival_matches_quadrature_of_absorbed_density() {
        for &(t, u, v, mu) in &[
            (1.0, 0.8, 0.0, 0.5),
            (0.5, 1.5, 1.0, -1.0),
            (3.0, 0.3, 0.0, 0.0),
            (2.0, 1.1, 0.6, 2.0),
        ] {
            let direct = survival_probability(t, u, v, mu).unwrap();
            let integrand = |y: f64| {
                absorbed_density(&KernelParams { s: t, u, y, v, mu }).unwrap_or(0.0)
            };
            let mass = quad::integrate_semi_infinite(integrand, v, (t as f64).sqrt(), &cfg())
                .unwrap()
                .value;
            assert_relative_eq!(direct, mass, max_relative = 1e-10);
        }
    }

    #[test]
    fn ln_survival_matches_linear_and_survives_underflow() {
        for &(t, u, v, mu) in &[(1.0, 0.8, 0.0, 0.5), (2.0, 1.1, 0.6, -2.0)] {
            assert_relative_eq!(
                ln_survival_probability(t, u, v, mu).unwrap(),
                survival_probability(t, u, v, mu).unwrap().ln(),
                max_relative = 1e-12
            );
        }
        // Strong negative drift: survival underflows, log form does not.
        let ln_s = ln_survival_probability(1.0, 0.5, 0.0, -60.0).unwrap();
        assert!(survival_probability(1.0, 0.5, 0.0, -60.0).unwrap() == 0.0);
        assert!(ln_s.is_finite() && ln_s < -700.0);
    }

    #[test]
    fn absorbed_mass_matches_quadrature() {
        for &(s, u, y, v, mu) in &[
            (1.0, 0.8, 1.5, 0.0, 0.7),
            (0.4, 1.2, 1.05, 1.0, -0.5),
            (2.5, 0.5, 4.0, 0.0, 0.0),
        ] {
            let direct = absorbed_mass(s, u, y, v, mu).unwrap();
            let q = integrate(
                |yy| absorbed_density(&KernelParams { s, u, y: yy, v, mu }).unwrap_or(0.0),
                v,
                y,
                &cfg(),
            )
            .unwrap()
            .value;
            assert_relative_eq!(direct, q, max_relative = 1e-10, epsilon = 1e-13);
        }
    }

    #[test]
    fn band_density_reduces_to_absorbed_when_wall_recedes() {
        for &(s, u, y, v, mu) in &[(1.0, 0.8, 1.5, 0.0, 0.7), (0.4, 1.2, 1.05, 1.0, -0.5)] {
            let p = BandParams::new(s, u, y, v, 60.0, mu).unwrap();
            let kp = KernelParams { s, u, y, v, mu };
            assert_relative_eq!(
                band_density(&p, &cfg()).unwrap(),
                absorbed_density(&kp).unwrap(),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn band_density_vanishes_at_both_walls() {
        let cfg = cfg();
        for &(s, u, v, upper, mu) in &[(0.6, 0.4, 0.0, 1.0, 1.3), (1.5, 1.2, 0.5, 2.0, -0.8)] {
            let near_lower = BandParams::new(s, u, v + 1e-9 * (upper - v), v, upper, mu).unwrap();
            let near_upper = BandParams::new(s, u, upper - 1e-9 * (upper - v), v, upper, mu).unwrap();
            let mid = BandParams::new(s, u, 0.5 * (v + upper), v, upper, mu).unwrap();
            let dm = band_density(&mid, &cfg).unwrap();
            assert!(band_density(&near_lower, &cfg).unwrap() < 1e-7 * dm);
            assert!(band_density(&near_upper, &cfg).unwrap() < 1e-7 * dm);
        }
    }

    #[test]
    fn band_truncation_error_is_bounded_by_tolerance() {
        let p = BandParams::new(0.8, 0.3, 0.6, 0.0, 1.0, 1.1).unwrap();
        // Find the k_max the adaptive rule effectively used by matching its
        // output, then check adding 5 more image pairs moves nothing.
        let adaptive = band_series(&p, cfg().series_tol, cfg().series_max_terms).unwrap();
        let mut k_max = 1;
        while (band_series_partial(&p, k_max) - adaptive).abs() > 1e-13 * (1.0 + adaptive.abs()) {
            k_max += 1;
            assert!(k_max < 500);
        }
        let wider = band_series_partial(&p, k_max + 5);
        assert!(
            (wider - adaptive).abs() <= cfg().series_tol * (1.0 + adaptive.abs()),
            "truncation error {} exceeds tolerance",
            (wider - adaptive).abs()
        );
    }

    #[test]
    fn band_series_cap_is_reported() {
        let mut tight = cfg();
        tight.series_max_terms = 3;
        // Narrow band at small s needs many images.
        let p = BandParams::new(5.0, 0.5, 0.5, 0.0, 1.0, 0.0).unwrap();
        match band_density(&p, &tight) {
            Err(Error::SeriesConvergence { max_terms, .. }) => assert_eq!(max_terms, 3),
            other => panic!("expected SeriesConvergence, got {other:?}"),
        }
    }

    #[test]
    fn half_gaussian_exp_integral_matches_quadrature() {
        for &(a, tau, mu) in &[
            (0.7, 1.0, 0.9),
            (2.0, 0.3, -1.5),
            (0.05, 2.0, 0.0),
            (1.0, 1.0, 3.0),
        ] {
            let direct = half_gaussian_exp_integral(a, tau, mu).unwrap();
            let rt = (tau as f64).sqrt();
            let integrand = move |w: f64| {
                let phi = |x: f64| FRAC_1_SQRT_2PI * (-0.5 * x * x / tau).exp() / rt;
                (phi(w - a) - phi(w + a)) * (mu * w).exp()
            };
            let q = quad::integrate_semi_infinite(integrand, 0.0, rt * (1.0 + mu.abs()), &cfg())
                .unwrap()
                .value;
            assert_relative_eq!(direct, q, max_relative = 1e-10);
        }
    }

    #[test]
    fn half_gaussian_exp_integral_overflow_fallback() {
        // mu a + mu^2 tau / 2 far beyond exp range of the primary factors.
        let v = half_gaussian_exp_integral(40.0, 1.0, 40.0).unwrap();
        assert!(v.is_infinite() || v > 1e300);
        let ln_v = ln_half_gaussian_exp_integral(40.0, 1.0, 40.0).unwrap();
        assert_relative_eq!(ln_v, 40.0 * 40.0 + 0.5 * 1600.0, max_relative = 1e-6);
        // Moderate overflow territory where the identity route is exact.
        let a = 25.0;
        let mu = 25.0;
        let direct = half_gaussian_exp_integral(a, 1.0, mu).unwrap();
        let ln_expected = ln_half_gaussian_exp_integral(a, 1.0, mu).unwrap();
        assert_relative_eq!(direct.ln(), ln_expected, max_relative = 1e-12);
    }

    #[test]
    fn rayleigh_exp_normalizer_matches_quadrature() {
        for &(t, mu) in &[(1.0, 0.8), (0.25, -2.0), (4.0, 0.0), (2.0, 1.5)] {
            let direct = rayleigh_exp_normalizer(t, mu).unwrap();
            let q = quad::integrate_semi_infinite(
                |w| w * (-0.5 * w * w / t + mu * w).exp(),
                0.0,
                (t as f64).sqrt() * (1.0 + mu.abs() * (t as f64).sqrt()),
                &cfg(),
            )
            .unwrap()
            .value;
            assert_relative_eq!(direct, q, max_relative = 1e-10);
        }
    }

    proptest! {
        #[test]
        fn half_gaussian_exp_integral_is_odd_in_a(
            a in 0.01f64..3.0, tau in 0.05f64..4.0, mu in -3.0f64..3.0
        ) {
            let plus = half_gaussian_exp_integral(a, tau, mu).unwrap();
            let minus = half_gaussian_exp_integral(-a, tau, mu).unwrap();
            prop_assert!((plus + minus).abs() <= 1e-12 * (1.0 + plus.abs()));
        }

        #[test]
        fn band_is_dominated_by_absorbed(
            s in 0.05f64..3.0, u0 in 0.05f64..0.95, y0 in 0.05f64..0.95,
            l in 0.2f64..4.0, mu in -2.0f64..2.0
        ) {
            // Killing at an extra wall only removes mass.
            let p = BandParams::new(s, u0 * l, y0 * l, 0.0, l, mu).unwrap();
            let band = band_density(&p, &cfg()).unwrap();
            let abs = absorbed_density(&KernelParams { s, u: p.u, y: p.y, v: 0.0, mu }).unwrap();
            prop_assert!(band <= abs * (1.0 + 1e-9) + 1e-300);
            prop_assert!(band >= 0.0);
        }

        #[test]
        fn survival_is_monotone_in_start_and_bounded(
            t in 0.05f64..4.0, a in 0.01f64..3.0, da in 0.01f64..1.0, mu in -3.0f64..3.0
        ) {
            let lo = survival_probability(t, a, 0.0, mu).unwrap();
            let hi = survival_probability(t, a + da, 0.0, mu).unwrap();
            prop_assert!((0.0..=1.0).contains(&lo));
            prop_assert!(hi >= lo - 1e-12);
        }

        #[test]
        fn chapman_kolmogorov_for_absorbed_kernel(
            s1 in 0.1f64..1.5, s2 in 0.1f64..1.5,
            u in 0.2f64..2.0, y in 0.2f64..2.0, mu in -1.5f64..1.5
        ) {
            // integral_v^inf p(s1, u -> z) p(s2, z -> y) dz = p(s1 + s2, u -> y)
            let total = absorbed_density(&KernelParams { s: s1 + s2, u, y, v: 0.0, mu }).unwrap();
            let conv = quad::integrate_semi_infinite(
                |z| {
                    let a = absorbed_density(&KernelParams { s: s1, u, y: z, v: 0.0, mu }).unwrap_or(0.0);
                    let b = absorbed_density(&KernelParams { s: s2, u: z, y, v: 0.0, mu }).unwrap_or(0.0);
                    a * b
                },
                0.0,
                (s1 + s2 as f64).sqrt().max(u.max(y)),
                &cfg(),
            ).unwrap().value;
            prop_assert!((total - conv).abs() <= 1e-8 * (1.0 + total.abs()),
                "CK violated: kernel {} vs convolution {}", total, conv);
        }
    }
}
