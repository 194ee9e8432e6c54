//! Skew-normal extremes: special functions, the SN(λ) distribution, norming
//! constants for its maxima and the Gumbel convergence-rate experiment.

pub mod convergence;
pub mod error;
pub mod norming;
pub mod quadrature;
pub mod skew_normal;
pub mod special_fn;

pub use error::{Error, Result};
