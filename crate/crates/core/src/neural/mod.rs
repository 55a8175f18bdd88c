//! Dense feedforward networks with exact backpropagation, Adam, and the
//! squashed-Gaussian policy head used by the actors.
//!
//! Batches are column-major: a batch of `B` inputs of width `n` is an
//! `n × B` matrix, one sample per column.

mod adam;
mod checkpoint;
mod mlp;
mod policy;

pub use adam::AdamState;
pub use checkpoint::{AdamCheckpoint, Checkpoint, NetworkCheckpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use mlp::{ForwardCache, Mlp, MlpGrads};
pub use policy::{
    deterministic_action, policy_backward, policy_batch, sample_policy, squashed_log_prob, BatchPolicy, PolicyHead,
    PolicySample,
};

#[derive(Debug, thiserror::Error)]
pub enum NeuralError {
    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: String, found: String },
    #[error("non-finite gradient in layer {layer}")]
    NonFiniteGradient { layer: usize },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}
