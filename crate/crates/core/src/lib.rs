//! Minipatch consensus clustering.
//!
//! Ensembles of Ward.D hierarchical clusterings fitted to tiny random
//! observation x feature subsamples ("minipatches"), accumulated into a
//! consensus matrix. Three sampling modes are provided:
//!
//! - `Mpcc`: uniform minipatches.
//! - `Mpacc`: adaptive observation sampling driven by confusion values.
//! - `Impacc`: adaptive observation and feature sampling, where feature
//!   weights are learned from per-minipatch ANOVA tests. The learned
//!   feature importance scores are returned with the partition.
//!
//! The crate also contains the synthetic benchmark generators, evaluation
//! metrics (ARI, F1) and a Monte-Carlo checker for the subsampled-distance
//! deviation bound.

pub mod consensus;
pub mod dataio;
pub mod dist;
pub mod error;
pub mod hclust;
pub mod metrics;
pub mod pipeline;
pub mod rng;
pub mod sampling;
pub mod stats;
pub mod synthgen;

pub use dataio::DataMatrix;
pub use error::{Error, Result};
pub use pipeline::{HyperParams, Mode, RunResult};
