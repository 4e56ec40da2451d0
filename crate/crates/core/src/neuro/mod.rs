// SPDX-License-Identifier: Apache-2.0

//! Graph attention classifiers over typed message-passing graphs.
//!
//! Four variants share one implementation: static (GAT) or dynamic (GATv2)
//! attention, each with shared or per-edge-type parameters. Gradients are
//! derived by hand and checked against finite differences in the tests.

pub mod attention;
pub mod checkpoint;
pub mod features;
pub mod layer;
pub mod model;
pub mod optim;
pub mod tensor;
pub mod train;

use thiserror::Error;

pub use features::{prepare, GraphInput};
pub use layer::{GraphStructure, Variant};
pub use model::{loss_and_grads, predict, Architecture, Hyperparams, ModelParams};
pub use train::{evaluate, train, Evaluation, TrainOptions, TrainReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NeuroError {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("edge type {0} has no parameters")]
    UnknownType(usize),
    #[error("node {0} has no incoming edges")]
    IsolatedNode(usize),
    #[error("parameter shape mismatch: expected {expected} values, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("loss is not finite")]
    NonFiniteLoss,
    #[error("training diverged at step {step} after {samples_seen} samples")]
    Diverged { step: u64, samples_seen: u64 },
    #[error("empty batch or dataset")]
    EmptyBatch,
    #[error("sample has no label")]
    MissingLabel,
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),
    #[error("unknown variant {0:?}")]
    UnknownVariant(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("data error: {0}")]
    Data(String),
}
