//! Laws of drifted Brownian motion conditioned to stay above a barrier.
//!
//! The crate computes, in closed or quadrature-backed form, the laws of
//! the drifted Brownian meander (conditioned positive on `[0, t]`, started
//! above the barrier or in the limit from it), the drifted excursion
//! (additionally pinned at the far end), the running maximum and
//! first-passage time of the conditioned motion, and the last-zero
//! decomposition that maps post-zero path segments to meanders with a
//! random sign and drift. Every analytic law ships with a conditioned
//! Monte Carlo sampler and a verification suite that cross-checks the two
//! at configurable sample sizes.
//!
//! Numerical policy: linear-space formulas are rearranged (scaled error
//! functions, `expm1`/`ln1p`, log-space fallbacks) so that results stay
//! accurate wherever the underlying quantities are representable, and
//! routines return typed errors rather than NaN when asked to leave the
//! supported domain.

pub mod config;
pub mod error;
pub mod excursion;
pub mod extremes;
pub mod gof;
pub mod kernels;
pub mod meander;
pub mod quad;
pub mod representation;
pub mod rng;
pub mod sampler;
pub mod special;
pub mod verify;

pub use config::NumericsConfig;
pub use error::{Error, Result};
