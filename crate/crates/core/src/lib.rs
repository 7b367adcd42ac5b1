//! Error bounds for the Gaussian, gamma and Poisson approximation of random
//! sums `Y = X_1 + ... + X_N` whose summands are equally correlated, together
//! with exact and Monte Carlo evaluation of the Wasserstein, stop-loss and
//! total-variation distances those bounds dominate.
//!
//! The count `N` is independent of the claims; the claims follow a mixture
//! model in which, with probability `rho`, all summands equal a single draw of
//! `X_1` and, with probability `1 - rho`, they are fully independent. `rho` is
//! the pairwise correlation between distinct summands.
//!
//! Crate layout:
//! - [`dist`]: parametric count and claim laws, moments and sampling;
//! - [`pmf`]: exact lattice pmfs and convolution machinery;
//! - [`transforms`]: size-, zero-, generalized-zero- and non-zero-bias
//!   functionals and coupling expectations;
//! - [`model`]: the random-sum model, its sampler and exact pmf;
//! - [`bounds`]: the approximation bounds, each reported with every
//!   intermediate constant;
//! - [`metrics`]: Wasserstein, stop-loss and total-variation distances;
//! - [`harness`]: configuration, verification rows and the CLI commands.

pub mod bounds;
pub mod dist;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod pmf;
pub mod rng;
pub mod special;
pub mod transforms;

pub use error::{Error, Result};
