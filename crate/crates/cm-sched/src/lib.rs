//! Noise scheduling and curriculum toolkit for consistency-model training.
//!
//! The library is organized around one rule: generate the Karras noise
//! grid once, then *select* from it everywhere. On top of that sit
//!
//! - [`schedule`] — the predefined noise array, discretization
//!   subsampling, polynomial and log-normal batch schedulers, and
//!   high-noise injection;
//! - [`curriculum`] — sinusoidal, doubling and constant maps from
//!   training step to discretization count, plus the eliminated-level
//!   view of the decreasing phase;
//! - [`analysis`] — bucket composition reports, unique-level audits and
//!   schedule comparisons;
//! - [`toy`] — a small consistency-training harness on 2D toy data with
//!   analytic gradients, multistep sampling and sliced-Wasserstein
//!   evaluation.
//!
//! Every stochastic operation is a pure function of `(inputs, seed)`;
//! identical configs rerun to bit-identical results. See the crate
//! examples for one runnable walkthrough per capability.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod csvio;
pub mod curriculum;
pub mod error;
pub mod rng;
pub mod schedule;
pub mod svg;
pub mod toy;

pub use error::{Error, Result};
