//! Tolerance and budget knobs for the numerical routines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances shared by quadrature and series evaluation.
///
/// The defaults are tight enough that analytic identities (normalization,
/// semigroup consistency, regime agreement) hold to at least 1e-8 absolute
/// over the parameter ranges exercised by the verification suite.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NumericsConfig {
    /// Absolute tolerance for adaptive quadrature.
    pub quad_abs_tol: f64,
    /// Relative tolerance for adaptive quadrature.
    pub quad_rel_tol: f64,
    /// Subdivision budget for adaptive quadrature. Each refinement splits
    /// the worst subinterval in two, so this bounds the interval count.
    pub quad_max_levels: usize,
    /// Series truncation threshold: summation stops once two consecutive
    /// terms fall below `series_tol * (1 + |partial sum|)`.
    pub series_tol: f64,
    /// Hard cap on series terms before reporting non-convergence.
    pub series_max_terms: usize,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            quad_abs_tol: 1e-12,
            quad_rel_tol: 1e-9,
            quad_max_levels: 200,
            series_tol: 1e-14,
            series_max_terms: 10_000,
        }
    }
}

impl NumericsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.quad_abs_tol.is_finite() && self.quad_abs_tol > 0.0) {
            return Err(Error::Config(format!(
                "quad_abs_tol must be positive, got {}",
                self.quad_abs_tol
            )));
        }
        if !(self.quad_rel_tol.is_finite() && self.quad_rel_tol > 0.0) {
            return Err(Error::Config(format!(
                "quad_rel_tol must be positive, got {}",
                self.quad_rel_tol
            )));
        }
        if self.quad_max_levels == 0 {
            return Err(Error::Config("quad_max_levels must be at least 1".into()));
        }
        if !(self.series_tol.is_finite() && self.series_tol > 0.0) {
            return Err(Error::Config(format!(
                "series_tol must be positive, got {}",
                self.series_tol
            )));
        }
        if self.series_max_terms < 3 {
            return Err(Error::Config("series_max_terms must be at least 3".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        NumericsConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_tolerances() {
        let mut cfg = NumericsConfig::default();
        cfg.quad_abs_tol = 0.0;
        assert!(cfg.validate().is_err());

        let mut cfg = NumericsConfig::default();
        cfg.series_tol = f64::NAN;
        assert!(cfg.validate().is_err());

        let mut cfg = NumericsConfig::default();
        cfg.quad_max_levels = 0;
        assert!(cfg.validate().is_err());
    }
}
