//! Numerical laboratory for strictly subgaussian distributions.
//!
//! The crate constructs mean-0 variance-1 laws whose Laplace transform has
//! the form Psi(t) e^{t^2/2} with Psi <= 1, computes densities of normalized
//! i.i.d. sums by independent routes, evaluates Renyi/Tsallis divergences
//! relative to the standard normal up to order infinity, and runs the
//! convergence diagnostics and rate sweeps built on top of them.

#![forbid(unsafe_code)]

pub mod cli;
pub mod config;
pub mod conv;
pub mod diag;
pub mod dist;
pub mod div;
pub mod error;
pub mod fft;
pub mod grid;
pub mod llt;
pub mod num;
pub mod saddle;
pub mod sweep;
pub mod tilt;

pub use error::{Error, Result};
