//! Laws of the maximum `M` and its location `rho` for Bessel bridges, skew
//! Brownian bridges and generalized Bessel meanders.
//!
//! The joint law of `(M, rho)` is a product of two first-hitting-time
//! densities. Marginals come from Abel-regularized double series built on the
//! spectral expansion of those densities. A Monte Carlo oracle provides
//! independent ground truth.

pub mod error;
pub mod special_functions;
pub mod quadrature;
pub mod series_engine;
pub mod hitting_densities;
pub mod extreme_laws;
pub mod simulation_oracle;
pub mod cli_io;

pub use error::{Error, Result};
