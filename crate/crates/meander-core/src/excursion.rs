//! Laws of the drifted excursion: the motion conditioned to stay above the
//! barrier on `[0, t]` *and* pinned to end at `c`.
//!
//! Pinning kills the drift: the Girsanov weight of a bridge depends only on
//! its fixed endpoints, so it cancels between numerator and denominator and
//! the conditioned law coincides with the driftless one. The default
//! evaluators exploit that and never touch `mu`; the `_tilted` variants
//! evaluate the literal drifted ratio instead, and exist so the cancellation
//! can be asserted numerically rather than assumed.
//!
//! `excursion_limit_joint_density` evaluates the weak limits as the start
//! (and optionally the pinned end) collapses onto the barrier, where the
//! plain ratio degenerates to 0/0.

use crate::error::{require_finite, Error, Result};
use crate::kernels::{ln_absorbed_density, KernelParams};
use crate::meander::TimeValueGrid;
use crate::special::{FRAC_1_SQRT_2PI, SQRT_2PI};

/// A drifted excursion: stays above `barrier` on `[0, horizon]`, starts at
/// `start > barrier`, ends at `end > barrier`.
#[derive(Debug, Clone, Copy)]
pub struct ExcursionSpec {
    pub mu: f64,
    pub barrier: f64,
    pub start: f64,
    pub end: f64,
    pub horizon: f64,
}

impl ExcursionSpec {
    pub fn new(mu: f64, barrier: f64, start: f64, end: f64, horizon: f64) -> Result<Self> {
        let spec = ExcursionSpec { mu, barrier, start, end, horizon };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        require_finite(&[
            ("mu", self.mu),
            ("barrier", self.barrier),
            ("start", self.start),
            ("end", self.end),
            ("horizon", self.horizon),
        ])?;
        if self.horizon <= 0.0 {
            return Err(Error::domain(format!("horizon must be positive, got {}", self.horizon)));
        }
        if self.start <= self.barrier {
            return Err(Error::domain(format!(
                "start {} must lie strictly above the barrier {}",
                self.start, self.barrier
            )));
        }
        if self.end <= self.barrier {
            return Err(Error::domain(format!(
                "end {} must lie strictly above the barrier {}",
                self.end, self.barrier
            )));
        }
        Ok(())
    }
}

/// Which boundary points of the excursion are taken to the barrier limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitMode {
    /// Start collapses onto the barrier; the end stays pinned at `end`.
    StartLimit,
    /// Both the start and the pinned end collapse onto the barrier.
    BothLimits,
}

fn validate_grid(spec: &ExcursionSpec, grid: &TimeValueGrid) -> Result<()> {
    let n = grid.len();
    if grid.times()[n - 1] >= spec.horizon {
        return Err(Error::domain(format!(
            "last grid time {} must be strictly inside the horizon {}",
            grid.times()[n - 1],
            spec.horizon
        )));
    }
    for &y in grid.values() {
        if y <= spec.barrier {
            return Err(Error::domain(format!(
                "grid value {} must lie strictly above the barrier {}",
                y, spec.barrier
            )));
        }
    }
    Ok(())
}

fn joint_with_drift(spec: &ExcursionSpec, grid: &TimeValueGrid, mu: f64) -> Result<f64> {
    spec.validate()?;
    validate_grid(spec, grid)?;
    let v = spec.barrier;
    let t = spec.horizon;
    let times = grid.times();
    let values = grid.values();
    let n = grid.len();

    let mut ln_f =
        ln_absorbed_density(&KernelParams { s: times[0], u: spec.start, y: values[0], v, mu })?;
    for j in 1..n {
        ln_f += ln_absorbed_density(&KernelParams {
            s: times[j] - times[j - 1],
            u: values[j - 1],
            y: values[j],
            v,
            mu,
        })?;
    }
    ln_f += ln_absorbed_density(&KernelParams {
        s: t - times[n - 1],
        u: values[n - 1],
        y: spec.end,
        v,
        mu,
    })?;
    ln_f -= ln_absorbed_density(&KernelParams { s: t, u: spec.start, y: spec.end, v, mu })?;
    Ok(ln_f.exp())
}

/// Joint density of the excursion on an interior time grid, evaluated with
/// the driftless kernels (the law does not depend on `mu`).
pub fn excursion_joint_density(spec: &ExcursionSpec, grid: &TimeValueGrid) -> Result<f64> {
    joint_with_drift(spec, grid, 0.0)
}

/// Same law evaluated as the literal ratio of drifted kernels; agrees with
/// [`excursion_joint_density`] up to floating-point noise.
pub fn excursion_joint_density_tilted(spec: &ExcursionSpec, grid: &TimeValueGrid) -> Result<f64> {
    joint_with_drift(spec, grid, spec.mu)
}

/// Marginal density of the excursion value at one interior time.
pub fn excursion_marginal_density(spec: &ExcursionSpec, s: f64, y: f64) -> Result<f64> {
    let grid = TimeValueGrid::new(vec![s], vec![y])?;
    joint_with_drift(spec, &grid, 0.0)
}

/// Drifted-ratio evaluation of [`excursion_marginal_density`].
pub fn excursion_marginal_density_tilted(spec: &ExcursionSpec, s: f64, y: f64) -> Result<f64> {
    let grid = TimeValueGrid::new(vec![s], vec![y])?;
    joint_with_drift(spec, &grid, spec.mu)
}

/// Joint density of the excursion whose start (and, for
///// [`LimitMode::BothLimits`], whose pinned end) sits at the barrier in the
/// weak-limit sense. `spec.start` is ignored; `spec.end` is ignored in
/// `BothLimits` mode; the law is drift-free like every excursion law.
pub fn excursion_limit_joint_density(
    spec: &ExcursionSpec,
    grid: &TimeValueGrid,
    mode: LimitMode,
) -> Result<f64> {
    spec.validate()?;
    validate_grid(spec, grid)?;
    let v = spec.barrier;
    let t = spec.horizon;
    let times = grid.times();
    let values = grid.values();
    let n = grid.len();

    // First factor: limit of p0(s1, u -> y1) / p0(t, u -> c) pieces as the
    // start goes to the barrier, with everything translated so the barrier
    // sits at zero.
    let s1 = times[0];
    let a1 = values[0] - v;
    let mut ln_f = 1.5 * (t.ln() - s1.ln()) + a1.ln() - 0.5 * a1 * a1 / s1;
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
    let tau = t - times[n - 1];
    match mode {
        LimitMode::StartLimit => {
            let gamma = spec.end - v;
            // Closing kernel to the pinned end, and the limit of the
            // denominator contributes exp(gamma^2 / 2t) / gamma.
            ln_f += ln_absorbed_density(&KernelParams {
                s: tau,
                u: values[n - 1],
                y: spec.end,
                v,
                mu: 0.0,
            })?;
            ln_f += 0.5 * gamma * gamma / t - gamma.ln();
        }
        LimitMode::BothLimits => {
            // lim_{c -> 0} p0(tau, a_n -> c) / c = (2 a_n / tau) phi_tau(a_n).
            ln_f += (2.0 * an / tau * FRAC_1_SQRT_2PI / tau.sqrt()).ln() - 0.5 * an * an / tau;
        }
    }
    Ok(ln_f.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::NumericsConfig;
    use crate::quad;
    use approx::assert_relative_eq;

    fn cfg() -> NumericsConfig {
        NumericsConfig::default()
    }

    #[test]
    fn marginal_normalizes() {
        for &(v, u, c, t, s) in &[
            (0.0, 0.2, 0.3, 1.0, 0.5),
            (1.0, 1.1, 2.0, 2.0, 0.4),
            (-0.5, 0.5, -0.2, 0.7, 0.35),
        ] {
            let spec = ExcursionSpec::new(1.3, v, u, c, t).unwrap();
            let mass = quad::integrate_semi_infinite(
                |y| excursion_marginal_density(&spec, s, y).unwrap_or(0.0),
                v,
                (t as f64).sqrt(),
                &cfg(),
            )
            .unwrap()
            .value;
            assert_relative_eq!(mass, 1.0, max_relative = 1e-8);
        }
    }

    #[test]
    fn drift_cancels_to_machine_precision() {
        let base = ExcursionSpec::new(0.0, 0.0, 0.2, 0.3, 1.0).unwrap();
        for &mu in &[-3.0, -0.7, 0.4, 2.0] {
            let spec = ExcursionSpec { mu, ..base };
            for i in 1..40 {
                let y = 0.08 * i as f64;
                let reduced = excursion_marginal_density(&spec, 0.5, y).unwrap();
                let tilted = excursion_marginal_density_tilted(&spec, 0.5, y).unwrap();
                assert_relative_eq!(reduced, tilted, max_relative = 1e-12, epsilon = 1e-280);
            }
        }
    }

    #[test]
    fn joint_marginalizes() {
        let spec = ExcursionSpec::new(0.9, 0.0, 0.2, 0.3, 1.0).unwrap();
        let (s1, s2, y2) = (0.3, 0.6, 0.45);
        let integrated = quad::integrate_semi_infinite(
            |y1| {
                if y1 <= 0.0 {
                    return 0.0;
                }
                let grid = TimeValueGrid::new(vec![s1, s2], vec![y1, y2]).unwrap();
                excursion_joint_density(&spec, &grid).unwrap_or(0.0)
            },
            0.0,
            1.0,
            &cfg(),
        )
        .unwrap()
        .value;
        let single = excursion_marginal_density(&spec, s2, y2).unwrap();
        assert_relative_eq!(integrated, single, max_relative = 1e-8);
    }

    #[test]
    fn start_limit_is_the_small_start_limit_of_the_ratio() {
        let t = 1.0;
        let c = 0.4;
        let grid = TimeValueGrid::new(vec![0.3, 0.7], vec![0.5, 0.6]).unwrap();
        let limit = {
            let spec = ExcursionSpec::new(0.0, 0.0, 1.0, c, t).unwrap();
            excursion_limit_joint_density(&spec, &grid, LimitMode::StartLimit).unwrap()
        };
        let gap = |u: f64| {
            let spec = ExcursionSpec::new(0.0, 0.0, u, c, t).unwrap();
            (excursion_joint_density(&spec, &grid).unwrap() - limit).abs()
        };
        let g1 = gap(1e-2);
        let g2 = gap(1e-3);
        let g3 = gap(1e-4);
        assert!(g1 > g2 && g2 > g3, "gaps not decreasing: {g1} {g2} {g3}");
        assert!(g3 < 1e-3 * limit.max(1.0));
    }

    #[test]
    fn both_limits_is_the_small_end_limit_of_start_limit() {
        let t = 1.0;
        let grid = TimeValueGrid::new(vec![0.4], vec![0.8]).unwrap();
        let both = {
            let spec = ExcursionSpec::new(0.0, 0.0, 1.0, 1.0, t).unwrap();
            excursion_limit_joint_density(&spec, &grid, LimitMode::BothLimits).unwrap()
        };
        let gap = |c: f64| {
            let spec = ExcursionSpec::new(0.0, 0.0, 1.0, c, t).unwrap();
            (excursion_limit_joint_density(&spec, &grid, LimitMode::StartLimit).unwrap() - both)
                .abs()
        };
        let g1 = gap(1e-2);
        let g2 = gap(1e-3);
        let g3 = gap(1e-4);
        assert!(g1 > g2 && g2 > g3, "gaps not decreasing: {g1} {g2} {g3}");
        assert!(g3 < 1e-3 * both);
    }

    #[test]
    fn one_point_both_limits_closed_form() {
        // f(y) = sqrt(2/pi) y^2 (t / (s (t-s)))^{3/2} exp(-y^2 t / (2 s (t-s)))
        let t = 2.0;
        let spec = ExcursionSpec::new(0.0, 0.0, 1.0, 1.0, t).unwrap();
        for &(s, y) in &[(0.5, 0.3), (1.0, 1.1), (1.7, 0.6)] {
            let grid = TimeValueGrid::new(vec![s], vec![y]).unwrap();
            let got = excursion_limit_joint_density(&spec, &grid, LimitMode::BothLimits).unwrap();
            let rate = t / (s * (t - s));
            let expect = (2.0 / std::f64::consts::PI).sqrt() * y * y * rate.powf(1.5)
                * (-0.5 * y * y * rate).exp();
            assert_relative_eq!(got, expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn both_limits_marginal_normalizes() {
        let spec = ExcursionSpec::new(0.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        let mass = quad::integrate_semi_infinite(
            |y| {
                if y <= 0.5 {
                    return 0.0;
                }
                let grid = TimeValueGrid::new(vec![0.35], vec![y]).unwrap();
                excursion_limit_joint_density(&spec, &grid, LimitMode::BothLimits).unwrap_or(0.0)
            },
            0.5,
            1.0,
            &cfg(),
        )
        .unwrap()
        .value;
        assert_relative_eq!(mass, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn translation_invariance() {
        // Shifting barrier, start, end, and values by the same amount must
        // leave every density unchanged.
        let grid0 = TimeValueGrid::new(vec![0.3, 0.6], vec![0.4, 0.7]).unwrap();
        let grid1 = TimeValueGrid::new(vec![0.3, 0.6], vec![2.4, 2.7]).unwrap();
        let s0 = ExcursionSpec::new(0.8, 0.0, 0.2, 0.5, 1.0).unwrap();
        let s1 = ExcursionSpec::new(0.8, 2.0, 2.2, 2.5, 1.0).unwrap();
        assert_relative_eq!(
            excursion_joint_density(&s0, &grid0).unwrap(),
            excursion_joint_density(&s1, &grid1).unwrap(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            excursion_limit_joint_density(&s0, &grid0, LimitMode::StartLimit).unwrap(),
            excursion_limit_joint_density(&s1, &grid1, LimitMode::StartLimit).unwrap(),
            max_relative = 1e-12
        );
    }
}
