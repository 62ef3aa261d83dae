//! Audit toolkit for similarity-based privacy metrics on synthetic tabular data.
//!
//! The three metrics (identical match share, distance to closest record and
//! nearest neighbor distance ratio) compare a statistic of the synthetic→train
//! nearest-neighbor distances against the same statistic computed for a
//! held-out test set. This crate implements them, the adversarial synthetic
//! datasets that pass all three while leaking records, and the Monte Carlo
//! harness showing how noisy the pass/fail verdict is.

pub mod cli;
pub mod counterexamples;
pub mod data;
pub mod error;
pub mod experiments;
pub mod metrics;
pub mod nn;
pub mod seed;

pub use error::{Error, Result};
