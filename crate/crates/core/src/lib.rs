//! Random forests with regularized (RRF) and importance-guided regularized
//! (GRRF) split selection for embedded feature selection.
//!
//! The crate is organised as:
//!
//! - [`data`]: datasets, CSV ingestion, sampling and the Friedman generator.
//! - [`tree`]: Gini impurity, split search, node-level feature selection, growth.
//! - [`forest`]: RF / RRF / GRRF ensembles, importance, voting, projection.
//! - [`bound`]: exhaustive checks on the number of distinct Gini gains per node.
//! - [`eval`]: replicate-based evaluation protocol and parameter sweeps.
//!
//! Parallel execution (rayon) is enabled by the default `parallel` feature.
//! Every result is independent of the thread count: each tree and each
//! replicate draws from its own seeded ChaCha stream.

pub mod bound;
pub mod data;
mod error;
pub mod eval;
pub mod exec;
pub mod forest;
pub mod rng;
pub mod tree;

pub use data::{Dataset, SplitPlan};
pub use error::{Error, Result};
pub use exec::Execution;
pub use forest::{
    importance, predict_forest, project, train_grrf, train_rf, train_rrf, Forest, ForestConfig,
    ImportanceVector, Mode, SampleMode, SelectionResult,
};
pub use tree::{ClassCounts, FeatureSet, GrowthConfig, SplitCandidate, Tree};

/// Version tag written into every JSON document produced by this crate.
pub const SCHEMA_VERSION: u32 = 1;
