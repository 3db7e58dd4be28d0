#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Limiting spectral distributions of large sample covariance matrices and
//! their use for counting the sources seen by a sensor array.
//!
//! The crate is organized bottom-up:
//!
//! - [`dist`]: empirical and limiting distribution functions, Kolmogorov distance, histograms.
//! - [`moments`]: the population-to-limit moment map and its inverse.
//! - [`support`]: support geometry of the limit (boundary function, splitting criterion, endpoints).
//! - [`stieltjes`]: the limit itself, via the Stieltjes-transform fixed point and its inversion.
//! - [`arraysim`]: uniform linear array scenarios, snapshots and sample covariances.
//! - [`detect`]: source enumeration from an observed spectrum.
//! - [`config`] and [`experiment`]: the experiment runner behind the `spectral-detect` binary.

pub mod arraysim;
pub mod config;
pub mod detect;
pub mod dist;
pub mod error;
pub mod experiment;
pub mod moments;
pub mod quad;
pub mod roots;
pub mod stieltjes;
pub mod support;

pub use error::{Error, Result};
