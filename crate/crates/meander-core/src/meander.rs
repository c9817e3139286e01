//! Marginal, endpoint, and finite-dimensional laws of the drifted motion
//! conditioned to stay above the barrier on `[0, t]` (the drifted meander).
//!
//! Two starting regimes are supported. Started at `u > v`, every law is a
//! ratio of absorbed kernels and survival probabilities. Started "at the
//! barrier" means the weak limit `u -> v+`, where those ratios converge to
//! densities built from a tilted Rayleigh factor at the first time point
//! and a forward exponential-moment weight at the last. The limit laws are
//! what the last-zero decomposition produces, so they get first-class
//! implementations rather than small-`u` evaluation (which loses all
//! precision as the numerator and denominator both vanish linearly).

use serde::{Deserialize, Serialize};

use crate::error::{require_finite, Error, Result};
use crate::kernels::{
    absorbed_density, absorbed_mass, half_gaussian_exp_integral, ln_absorbed_density,
    ln_half_gaussian_exp_integral, ln_rayleigh_exp_normalizer, ln_survival_probability,
    rayleigh_exp_normalizer, survival_probability, KernelParams,
};
use crate::rng::CounterRng;
use crate::special::{ln_norm_cdf_diff, norm_cdf, norm_cdf_diff, rayleigh_tilt, SQRT_2PI};

/// Where the conditioned motion starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Start {
    /// Weak limit of starting points decreasing to the barrier.
    AtBarrier,
    /// Fixed starting point strictly above the barrier.
    Above(f64),
}

/// A drifted meander: drift `mu`, barrier `barrier`, start regime, and the
/// conditioning horizon `horizon` (the motion is conditioned to stay above
/// the barrier on `[0, horizon]`).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MeanderSpec {
    pub mu: f64,
    pub barrier: f64,
    pub start: Start,
    pub horizon: f64,
}

impl MeanderSpec {
    pub fn new(mu: f64, barrier: f64, start: Start, horizon: f64) -> Result<Self> {
        let spec = MeanderSpec { mu, barrier, start, horizon };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        require_finite(&[("mu", self.mu), ("barrier", self.barrier), ("horizon", self.horizon)])?;
        if self.horizon <= 0.0 {
            return Err(Error::domain(format!("horizon must be positive, got {}", self.horizon)));
        }
        if let Start::Above(u) = self.start {
            require_finite(&[("start", u)])?;
            if u <= self.barrier {
                return Err(Error::domain(format!(
                    "start {} must lie strictly above the barrier {}",
                    u, self.barrier
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn start_value(&self) -> Option<f64> {
        match self.start {
            Start::Above(u) => Some(u),
            Start::AtBarrier => None,
        }
    }
}

/// Strictly increasing observation times paired with values; the argument
/// of the finite-dimensional laws.
#[derive(Debug, Clone)]
pub struct TimeValueGrid {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TimeValueGrid {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Grid("grid must contain at least one time".into()));
        }
        if times.len() != values.len() {
            return Err(Error::Grid(format!(
                "times ({}) and values ({}) differ in length",
                times.len(),
                values.len()
            )));
        }
        let mut prev = 0.0;
        for (i, &s) in times.iter().enumerate() {
            if !s.is_finite() || s <= prev {
                return Err(Error::Grid(format!(
                    "times must be finite and strictly increasing from 0; offender at index {i}"
                )));
            }
            prev = s;
        }
        for (i, &y) in values.iter().enumerate() {
            if !y.is_finite() {
                return Err(Error::Grid(format!("values must be finite; offender at index {i}")));
            }
        }
        Ok(TimeValueGrid { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one point
    }
}

fn check_interior_time(spec: &MeanderSpec, s: f64, allow_horizon: bool) -> Result<()> {
    require_finite(&[("s", s)])?;
    if s <= 0.0 || s > spec.horizon || (!allow_horizon && s == spec.horizon) {
        return Err(Error::domain(format!(
            "time {} must lie in (0, {}{}",
            s,
            spec.horizon,
            if allow_horizon { "]" } else { ")" }
        )));
    }
    Ok(())
}

fn check_value(spec: &MeanderSpec, y: f64) -> Result<f64> {
    require_finite(&[("y", y)])?;
    if y <= spec.barrier {
        return Err(Error::domain(format!(
            "value {} must lie strictly above the barrier {}",
            y, spec.barrier
        )));
    }
    Ok(y - spec.barrier)
}

/// Density of the meander value at time `s` (`0 < s <= horizon`; at the
/// horizon itself this is the endpoint law). Dispatches on the start regime.
pub fn marginal_density(spec: &MeanderSpec, s: f64, y: f64) -> Result<f64> {
    spec.validate()?;
    match spec.start {
        Start::AtBarrier => marginal_density_at_barrier(spec, s, y),
        Start::Above(u) => {
            check_interior_time(spec, s, true)?;
            check_value(spec, y)?;
            let t = spec.horizon;
            let v = spec.barrier;
            let num1 = absorbed_density(&KernelParams { s, u, y, v, mu: spec.mu })?;
            let num2 = if s == t { 1.0 } else { survival_probability(t - s, y, v, spec.mu)? };
            let den = survival_probability(t, u, v, spec.mu)?;
            if den > 1e-250 && num1 > 1e-250 {
                return Ok(num1 * num2 / den);
            }
            // Both pieces can underflow together (deep negative drift, long
            // horizons); the ratio is still well-defined in log space.
            let ln_num1 = ln_absorbed_density(&KernelParams { s, u, y, v, mu: spec.mu })?;
            let ln_num2 =
                if s == t { 0.0 } else { ln_survival_probability(t - s, y, v, spec.mu)? };
            let ln_den = ln_survival_probability(t, u, v, spec.mu)?;
            Ok((ln_num1 + ln_num2 - ln_den).exp())
        }
    }
}

/// Marginal density of the barrier-started meander at time `s < horizon`:
/// `(t/s)^{3/2} a exp(-a^2/(2s)) I(a, t - s, mu) / N(t, mu)`, `a = y - v`.
/// At `s == horizon` it routes to [`endpoint_density_at_barrier`].
pub fn marginal_density_at_barrier(spec: &MeanderSpec, s: f64, y: f64) -> Result<f64> {
    spec.validate()?;
    if spec.start != Start::AtBarrier {
        return Err(Error::domain(
            "marginal_density_at_barrier requires a spec with Start::AtBarrier".into(),
        ));
    }
    check_interior_time(spec, s, true)?;
    let a = check_value(spec, y)?;
    let t = spec.horizon;
    if s == t {
        return endpoint_density_at_barrier(spec, y);
    }
    let tau = t - s;
    let mu = spec.mu;
    if (mu * t.sqrt()).abs() < 35.0 && a / s.sqrt() < 35.0 {
        let i = half_gaussian_exp_integral(a, tau, mu)?;
        let n = rayleigh_exp_normalizer(t, mu)?;
        let val = (t / s).powf(1.5) * a * (-0.5 * a * a / s).exp() * i / n;
        if val.is_finite() {
            return Ok(val.max(0.0));
        }
    }
    let ln_val = 1.5 * (t.ln() - s.ln()) + a.ln() - 0.5 * a * a / s
        + ln_half_gaussian_exp_integral(a, tau, mu)?
        - ln_rayleigh_exp_normalizer(t, mu)?;
    Ok(ln_val.exp())
}

/// Endpoint density of the barrier-started meander:
/// `a exp(-a^2/(2t) + mu a) / N(t, mu)`, a tilted Rayleigh law.
pub fn endpoint_density_at_barrier(spec: &MeanderSpec, y: f64) -> Result<f64> {
    spec.validate()?;
    if spec.start != Start::AtBarrier {
        return Err(Error::domain(
            "endpoint_density_at_barrier requires a spec with Start::AtBarrier".into(),
        ));
    }
    let a = check_value(spec, y)?;
    let t = spec.horizon;
    let mu = spec.mu;
    let expo = -0.5 * a * a / t + mu * a;
    if (mu * t.sqrt()).abs() < 35.0 && expo < 700.0 {
        let val = a * expo.exp() / rayleigh_exp_normalizer(t, mu)?;
        if val.is_finite() {
            return Ok(val);
        }
    }
    Ok((a.ln() + expo - ln_rayleigh_exp_normalizer(t, mu)?).exp())
}

/// CDF of the meander endpoint, closed form for both start regimes.
pub fn endpoint_cdf(spec: &MeanderSpec, y: f64) -> Result<f64> {
    spec.validate()?;
    require_finite(&[("y", y)])?;
    if y <= spec.barrier {
        return Ok(0.0);
    }
    let t = spec.horizon;
    let v = spec.barrier;
    let mu = spec.mu;
    match spec.start {
        Start::Above(u) => {
            let mass = absorbed_mass(t, u, y, v, mu)?;
            let den = survival_probability(t, u, v, mu)?;
            if den <= 0.0 {
                return Err(Error::domain(
                    "conditioning event has vanishing probability at this precision".into(),
                ));
            }
            Ok((mass / den).clamp(0.0, 1.0))
        }
        Start::AtBarrier => {
            let a = y - v;
            let z = mu * t.sqrt();
            let rt = t.sqrt();
            // Integral_0^a w e^{-w^2/2t + mu w} dw by parts:
            // t (1 - h(a)) + mu t sqrt(2 pi t) e^{z^2/2} [Phi(a/rt - z) - Phi(-z)].
            let h = (-0.5 * a * a / t + mu * a).exp();
            let lo = -z;
            let hi = a / rt - z;
            let f = if z.abs() < 35.0 {
                let tilt_term = mu * SQRT_2PI * rt * (0.5 * z * z).exp() * norm_cdf_diff(lo, hi);
                (1.0 - h + tilt_term) / rayleigh_tilt(z)
            } else if z >= 35.0 {
                // R(z) ~ sqrt(2 pi) z e^{z^2/2} Phi(z); the h-terms are

                // O(e^{-z^2/2}) relative and drop below representable size.
                norm_cdf_diff(lo, hi) / norm_cdf(z)
            } else {
                // Deep negative drift: assemble the tilt term in log space.
                let tilt_term =
                    -((mu.abs() * SQRT_2PI * rt).ln() + 0.5 * z * z + ln_norm_cdf_diff(lo, hi))
                        .exp();
                (1.0 - h + tilt_term) / rayleigh_tilt(z)
            };
            Ok(f.clamp(0.0, 1.0))
        }
    }
}

/// Joint density of the meander at a strictly increasing grid of interior
/// times (`0 < s_1 < ... < s_n < horizon`). Markov factorization: absorbed
/// kernels along the grid, one forward weight at the last point, one
/// normalizer for the conditioning.
pub fn joint_density(spec: &MeanderSpec, grid: &TimeValueGrid) -> Result<f64> {
    spec.validate()?;
    let t = spec.horizon;
    let v = spec.barrier;
    let mu = spec.mu;
    let times = grid.times();
    let values = grid.values();
    let n = grid.len();
    if times[n - 1] >= t {
        return Err(Error::domain(format!(
            "last grid time {} must be strictly inside the horizon {}",
            times[n - 1],
            t
        )));
    }
    for &y in values {
        check_value(spec, y)?;
    }

    // Accumulate in log space: safe for any grid length and drift.
    let mut ln_f: f64;
    match spec.start {
        Start::Above(u) => {
            ln_f = ln_absorbed_density(&KernelParams { s: times[0], u, y: values[0], v, mu })?;
            for j in 1..n {
                ln_f += ln_absorbed_density(&KernelParams {
                    s: times[j] - times[j - 1],
                    u: values[j - 1],
                    y: values[j],
                    v,
                    mu,
                })?;
            }
            ln_f += ln_survival_probability(t - times[n - 1], values[n - 1], v, mu)?;
            ln_f -= ln_survival_probability(t, u, v, mu)?;
        }
        Start::AtBarrier => {
            // First factor from the barrier limit; interior kernels are the
            // driftless ones (the Girsanov weight collapses onto the first
            // and last factors); forward weight closes the product.
            let s1 = times[0];
            let a1 = values[0] - v;
            ln_f = 1.5 * (t.ln() - s1.ln()) + a1.ln() - 0.5 * a1 * a1 / s1;
            for j in 1..n {
                ln_f += ln_absorbed_density(&KernelParams {
                    s: times[j] - times[j - 1],
                    u: values[j - 1],
                    y: values[j],
                    v,
                    mu: 0.0,
                })?;
            }
            let an = values[n - 1] - v;
            ln_f += ln_half_gaussian_exp_integral(an, t - times[n - 1], mu)?;
            ln_f -= ln_rayleigh_exp_normalizer(t, mu)?;
        }
    }
    Ok(ln_f.exp())
}

/// Draws an exact sample of the barrier-started meander value at time
/// `s <= horizon` by rejection from a Rayleigh-plus-Gaussian envelope.
///
/// The target density is proportional to
/// `a exp(-(a - mu s)^2 / (2s)) * S(t - s, a, 0, mu)`; with `m = mu s` and
/// `w = a - m` the factor `a exp(-w^2/2s)` is dominated by
/// `(|w| + max(m, 0)) exp(-w^2/2s)`, an explicit two-component mixture, and
/// the survival factor is a probability, so the acceptance ratio is exact.
pub fn sample_marginal_at_barrier(spec: &MeanderSpec, s: f64, rng: &mut CounterRng) -> Result<f64> {
    spec.validate()?;
    if spec.start != Start::AtBarrier {
        return Err(Error::domain(
            "sample_marginal_at_barrier requires a spec with Start::AtBarrier".into(),
        ));
    }
    check_interior_time(spec, s, true)?;
    let t = spec.horizon;
    let tau = t - s;
    let mu = spec.mu;
    let m = mu * s;
    let m_plus = m.max(0.0);
    let root_s = s.sqrt();
    let w_rayleigh = 2.0 * s / (2.0 * s + m_plus * SQRT_2PI * root_s);

    const BUDGET: u64 = 1_000_000;
    for attempt in 1..=BUDGET {
        let w = if rng.uniform() < w_rayleigh {
            let r = root_s * (2.0 * rng.exponential()).sqrt();
            if rng.uniform() < 0.5 {
                r
            } else {
                -r
            }
        } else {
            root_s * rng.normal()
        };
        let a = w + m;
        if a <= 0.0 {
            continue;
        }
        let surv = if tau > 0.0 { survival_probability(tau, a, 0.0, mu)? } else { 1.0 };
        let accept = a / (w.abs() + m_plus) * surv;
        debug_assert!(accept <= 1.0 + 1e-12, "envelope violated: {accept} at attempt {attempt}");
        if rng.uniform() < accept {
            return Ok(spec.barrier + a);
        }
    }
    Err(Error::RejectionBudget { budget: BUDGET, acceptance: 0.0 })
}
