//! Gaussian multiarmed bandits with Bayesian upper-credible-limit policies.
//!
//! * [`env`] — bandit instances, grid reward surfaces, exponential kernels.
//! * [`inference`] — conjugate Gaussian posteriors, sequential and batch.
//! * [`policy`] — UCL indices and arm selection for flat, uncorrelated and
//!   correlated priors.
//! * [`bounds`] — finite-time regret bounds, the Lai-Robbins curve and
//!   numeric checks of the supporting inequalities.
//! * [`sim`] — seeded episodes and parallel ensembles.
//! * [`cli`] — JSON experiment configs and the command implementations.

pub mod bounds;
pub mod cli;
pub mod env;
mod error;
pub mod inference;
pub mod policy;
pub mod sim;

pub use error::{Error, Result};
