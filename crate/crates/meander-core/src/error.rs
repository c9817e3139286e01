//! Error type shared across the crate.
//!
//! Numerical routines fail loudly: out-of-domain arguments, series or
//! quadrature that did not converge within the configured budget, and
//! exhausted rejection-sampling budgets are all reported as typed errors
//! instead of NaN propagation.

/// Crate-wide error type.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid configuration value.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature did not converge: error estimate {estimate:.3e} after {intervals} subintervals (target {target:.3e})")]
    QuadConvergence {
        estimate: f64,
        intervals: usize,
        target: f64,
    },

    /// An image-charge or theta series exceeded its term budget.
    #[error("series did not converge within {max_terms} terms (last term {last_term:.3e})")]
    SeriesConvergence { max_terms: usize, last_term: f64 },

    /// Grid arrays disagree in length or are otherwise malformed.
    #[error("invalid grid: {0}")]
    Grid(String),

    /// A rejection sampler exhausted its attempt budget.
    #[error("rejection budget of {budget} attempts exhausted (empirical acceptance {acceptance:.3e})")]
    RejectionBudget { budget: u64, acceptance: f64 },

    /// A statistical routine was handed an empty or unsorted sample list.
    #[error("invalid sample list: {0}")]
    Samples(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

/// Checks that every named argument is finite; used by validation code.
pub(crate) fn require_finite(pairs: &[(&str, f64)]) -> Result<()> {
    for (name, value) in pairs {
        if !value.is_finite() {
            return Err(Error::Domain(format!("{name} must be finite, got {value}")));
        }
    }
    Ok(())
}
