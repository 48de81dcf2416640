//! Self-supervised counting features.
//!
//! Trains a convolutional feature so that the feature of a 2x-downsampled
//! image equals the sum of the features of its four tiles, using a
//! contrastive loss against a second image. Ships the full desk-scale
//! pipeline: synthetic data generation, siamese training, downsampling-style
//! diagnostics, retrieval, and frozen-feature linear probes.
//!
//! Start with the runnable examples:
//!
//! ```text
//! cargo run --release -p countnet --example generate_dataset
//! cargo run --release -p countnet --example train_counting
//! cargo run --release -p countnet --example style_matrix
//! ```
//!
//! or the `countnet` binary, which exposes the same pipeline as subcommands.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod image;
pub mod net;
pub mod objective;
pub mod probe;
pub mod rng;
pub mod shapes;
pub mod trainer;
pub mod transforms;

pub use error::{Error, Result};
