//! Last zero of drifted Brownian motion and the rescaled post-zero law.
//!
//! Let `T0` be the last zero of `B^mu` on `[0, t]`. Conditionally on
//! `T0 = t0`, the rescaled tail `|B^mu(t0 + s(t - t0))| / sqrt(t - t0)`,
//! `s` in `[0, 1]`, is a barrier-start meander on `[0, 1]` whose drift is
//! `X mu sqrt(t - t0)` with an independent fair sign `X`. `T0` itself is
//! `W V` where `W` is exponential of rate `mu^2 / 2` truncated at `t`
//! (atom at `t`) and `V` is an independent arcsine variable on `(0, 1)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::config::NumericsConfig;
use crate::error::{require_finite, Error, Result};
use crate::meander::{MeanderSpec, Start};
use crate::quad;
use crate::rng::CounterRng;
use crate::special::SQRT_2PI;

/// Law of the last zero before `horizon` of Brownian motion with `drift`.
#[derive(Debug, Clone, Copy)]
pub struct LastZeroLaw {
    pub horizon: f64,
    pub drift: f64,
}

impl LastZeroLaw {
    pub fn new(horizon: f64, drift: f64) -> Result<Self> {
        let law = LastZeroLaw { horizon, drift };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        require_finite(&[("horizon", self.horizon), ("drift", self.drift)])?;
        if self.horizon <= 0.0 {
            return Err(Error::domain(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        Ok(())
    }

    fn check_interior(&self, a: f64) -> Result<()> {
        require_finite(&[("a", a)])?;
        if a <= 0.0 || a >= self.horizon {
            return Err(Error::domain(format!(
                "time {} outside the open interval (0, {})",
                a, self.horizon
            )));
        }
        Ok(())
    }
}

/// Exponential of rate `rate_param` truncated at `cutoff`, with the excess
/// mass `atom_at_cutoff` sitting as an atom at the cutoff itself.
#[derive(Debug, Clone, Copy)]
pub struct TruncExp {
    pub rate_param: f64,
    pub cutoff: f64,
    pub atom_at_cutoff: f64,
}

impl TruncExp {
    /// The mixing variable of the last-zero law: rate `mu^2 / 2`, cutoff `t`.
    pub fn new(mu: f64, t: f64) -> Result<Self> {
        require_finite(&[("mu", mu), ("t", t)])?;
        if t <= 0.0 {
            return Err(Error::domain(format!("cutoff must be positive, got {t}")));
        }
        let rate_param = 0.5 * mu * mu;
        Ok(TruncExp { rate_param, cutoff: t, atom_at_cutoff: (-rate_param * t).exp() })
    }

    /// Inverse-CDF draw; returns the cutoff itself with probability
    /// `atom_at_cutoff`.
    pub fn sample(&self, rng: &mut CounterRng) -> f64 {
        if self.rate_param == 0.0 {
            return self.cutoff;
        }
        (rng.exponential() / self.rate_param).min(self.cutoff)
    }

    pub fn mean(&self) -> f64 {
        if self.rate_param == 0.0 {
            return self.cutoff;
        }
        // int_0^t w r e^{-rw} dw + t e^{-rt} telescopes by parts.
        -libm::expm1(-self.rate_param * self.cutoff) / self.rate_param
    }
}

/// Fair coin on `{-1, +1}`; the random sign attached to the post-zero drift.
#[derive(Debug, Clone, Copy, Default)]
pub struct SignMix;

impl SignMix {
    pub fn sample(&self, rng: &mut CounterRng) -> f64 {
        if rng.uniform() < 0.5 {
            -1.0
        } else {
            1.0
        }
    }
}

/// Density of the last zero at `a` in `(0, t)`.
///
/// Averaging the scaled arcsine density over `W` gives
///
/// ```text
/// f(a) = e^{-mu^2 t/2} / (pi sqrt(a(t-a)))
///      + |mu| sqrt(2 pi) e^{-mu^2 a/2} (Phi(|mu| sqrt(t-a)) - 1/2) / (pi sqrt(a))
/// ```
///
/// where the second term is the `w`-integral over `(a, t)` in closed form.
/// Both endpoint singularities are inverse square roots, so the density is
/// integrable with total mass one: started at zero, the motion always has
/// zeros immediately after time zero.
pub fn last_zero_density(law: &LastZeroLaw, a: f64) -> Result<f64> {
    law.validate()?;
    law.check_interior(a)?;
    let t = law.horizon;
    let mu = law.drift.abs();
    let arcsine = (-0.5 * mu * mu * t).exp() / (PI * (a * (t - a)).sqrt());
    if mu == 0.0 {
        return Ok(arcsine);
    }
    // 0.5 erf(x / sqrt 2) = Phi(x) - 1/2 without cancellation near x = 0.
    let half_cdf = 0.5 * libm::erf(mu * (t - a).sqrt() * FRAC_1_SQRT_2);
    let tail = mu * SQRT_2PI * (-0.5 * mu * mu * a).exp() * half_cdf / (PI * a.sqrt());
    Ok(arcsine + tail)
}

/// CDF of the last zero, `P(T0 <= a)`.
///
/// Substituting `a = t sin^2 theta` flattens both inverse-square-root
/// singularities, leaving a smooth integrand for the quadrature.
pub fn last_zero_cdf(law: &LastZeroLaw, a: f64, cfg: &NumericsConfig) -> Result<f64> {
    law.validate()?;
    cfg.validate()?;
    require_finite(&[("a", a)])?;
    if a <= 0.0 {
        return Ok(0.0);
    }
    let t = law.horizon;
    if a > t {
        return Ok(1.0);
    }
    // At a = t the quadrature is kept honest rather than short-circuited,
    // so the full-range call doubles as a normalization audit.
    let mu = law.drift.abs();
    let atom = (-0.5 * mu * mu * t).exp();
    let theta_hi = (a / t).min(1.0).sqrt().asin();
    let arcsine_part = atom * 2.0 * theta_hi / PI;
    if mu == 0.0 {
        return Ok(arcsine_part.clamp(0.0, 1.0));
    }
    let root_t = t.sqrt();
    let drift_part = quad::integrate(
        |theta| {
            let (sin, cos) = theta.sin_cos();
            let half_cdf = 0.5 * libm::erf(mu * root_t * cos * FRAC_1_SQRT_2);
            let gauss = (-0.5 * mu * mu * t * sin * sin).exp();
            2.0 * mu * (2.0 * t).sqrt() * cos * gauss * half_cdf / PI.sqrt()
        },
        0.0,
        theta_hi,
        cfg,
    )?
    .value;
    Ok((arcsine_part + drift_part).clamp(0.0, 1.0))
}

/// Exact draw of the last zero: `W` from the truncated exponential, then an
/// independent arcsine fraction of it.
pub fn sample_last_zero(law: &LastZeroLaw, rng: &mut CounterRng) -> Result<f64> {
    law.validate()?;
    let w = TruncExp::new(law.drift, law.horizon)?.sample(rng);
    let u = rng.uniform();
    let sin = (0.5 * PI * u).sin();
    Ok(w * sin * sin)
}

fn post_zero_component(mu_scaled: f64, s: f64, y: f64) -> Result<f64> {
    let spec = MeanderSpec::new(mu_scaled, 0.0, Start::AtBarrier, 1.0)?;
    crate::meander::marginal_density_at_barrier(&spec, s, y)
}

/// Marginal density at `(s, y)` of the rescaled post-zero process
/// `|B^mu(T0 + s(t - T0))| / sqrt(t - T0)`, as a Monte Carlo mixture over
/// the supplied last-zero draws: each `t0` contributes the even mixture of
/// unit-horizon barrier-start meanders with drifts `+-mu sqrt(t - t0)`.
pub fn rescaled_post_zero_density(
    law: &LastZeroLaw,
    s: f64,
    y: f64,
    t0_samples: &[f64],
) -> Result<f64> {
    law.validate()?;
    require_finite(&[("s", s), ("y", y)])?;
    if !(0.0..1.0).contains(&s) || s == 0.0 {
        return Err(Error::domain(format!("fraction s must lie in (0, 1), got {s}")));
    }
    if y <= 0.0 {
        return Err(Error::domain(format!("level y must be positive, got {y}")));
    }
    if t0_samples.is_empty() {
        return Err(Error::Samples("rescaled_post_zero_density needs last-zero draws".into()));
    }
    if law.drift == 0.0 {
        // Both mixture components coincide with the driftless meander.
        return post_zero_component(0.0, s, y);
    }
    let mut total = 0.0;
    for &t0 in t0_samples {
        if !t0.is_finite() || t0 < 0.0 || t0 >= law.horizon {
            return Err(Error::Samples(format!(
                "last-zero draw {} outside [0, {})",
                t0, law.horizon
            )));
        }
        let d = law.drift * (law.horizon - t0).sqrt();
        total += 0.5 * (post_zero_component(d, s, y)? + post_zero_component(-d, s, y)?);
    }
    Ok(total / t0_samples.len() as f64)
}

/// One draw of the rescaled post-zero value at fraction `s`: sample `T0`,
/// flip the sign, then draw from the matching unit-horizon meander.
pub fn sample_rescaled_post_zero(
    law: &LastZeroLaw,
    s: f64,
    rng: &mut CounterRng,
) -> Result<f64> {
    law.validate()?;
    if !(0.0..1.0).contains(&s) || s == 0.0 {
        return Err(Error::domain(format!("fraction s must lie in (0, 1), got {s}")));
    }
    let t0 = sample_last_zero(law, rng)?;
    let x = SignMix.sample(rng);
    let d = x * law.drift * (law.horizon - t0).sqrt();
    let spec = MeanderSpec::new(d, 0.0, Start::AtBarrier, 1.0)?;
    crate::meander::sample_marginal_at_barrier(&spec, s, rng)
}
