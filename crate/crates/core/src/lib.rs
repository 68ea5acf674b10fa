//! Multisource domain-adversarial training and a brute-force toolkit for
//! H-divergence, multi-source discrepancy and the associated target-risk bound.
//!
//! - [`nn`]: dense networks with exact backpropagation and Adam.
//! - [`theory`]: finite hypothesis classes, divergences, λ, bound assembly and
//!   Monte-Carlo concentration checks.
//! - [`mdan`]: the hard-max and smoothed multisource adversarial trainers.
//! - [`data`]: synthetic generators, file formats, manifests, minibatching.
//! - [`eval`]: proxy A-distance, Wilcoxon signed-rank test, experiments.

pub mod data;
pub mod error;
pub mod eval;
pub mod mdan;
pub mod nn;
pub mod rng;
pub mod theory;

pub use error::{Error, Result};
