//! Binary text classifier built from an embedding, a 1-D convolution with
//! max pooling, a bidirectional GRU, additive attention, global average
//! pooling, dropout and a sigmoid output unit.
//!
//! Everything is implemented by hand: forward and backward passes, Adam,
//! binary cross-entropy, the metrics suite, and Shapley-value attributions.
//! The only numeric dependency is a seeded ChaCha generator.
//!
//! Module map:
//!
//! - [`corpus`]: CSV ingestion and seeded train/validation/test splits
//! - [`textprep`]: cleaning, Porter stemming, vocabulary, padding
//! - [`num`]: dense tensors, activations, initialisation, finite differences
//! - [`layers`] and [`model`]: forward/backward passes for every layer
//! - [`trainer`]: BCE, Adam, mini-batch loop, early stopping, grid search
//! - [`metrics`]: confusion matrix, scalar metrics, ROC/AUC, MSE/RMSE
//! - [`explain`]: exact and sampled Shapley values, attention export
//! - [`container`] and [`config`]: model persistence and run configuration
//! - [`gradcheck`]: the finite-difference suite for every layer

pub mod baseline;
pub mod config;
pub mod container;
pub mod corpus;
pub mod error;
pub mod exec;
pub mod explain;
pub mod gradcheck;
pub mod layers;
pub mod metrics;
pub mod model;
pub mod num;
pub mod textprep;
pub mod trainer;

pub use error::{Error, Result};
pub use exec::Parallelism;
pub use model::{Model, ModelConfig, ModelParams};
pub use num::{Real, RngState, Tensor};
