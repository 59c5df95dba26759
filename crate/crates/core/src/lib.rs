//! Variance of the number of zeros of a stationary Gaussian process.

pub mod chaos;
pub mod cli;
pub mod dd;
pub mod error;
pub mod mc;
pub mod quad;
pub mod special;
pub mod variance;
pub mod spectral;

pub use error::{Error, Result};
