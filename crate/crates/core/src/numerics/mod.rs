//! Minimal dense linear algebra plus a manually differentiated feed-forward
//! network and optimizer, shared by the denoiser and the attack classifier.

mod adam;
mod checkpoint;
mod matrix;
mod mlp;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{read_mlp, write_mlp, CHECKPOINT_VERSION};
pub use matrix::DenseMatrix;
pub use mlp::{sigmoid, Activation, ForwardTrace, MlpGrads, MlpParams, OutputHead};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("dimension mismatch at {location}: expected {expected}, got {got}")]
    DimensionMismatch {
        location: String,
        expected: usize,
        got: usize,
    },
    #[error("invalid layer layout: {0}")]
    InvalidLayout(String),
    #[error("non-finite value in {block}")]
    NonFinite { block: String },
    #[error("non-finite gradient in {block}")]
    NonFiniteGradient { block: String },
    #[error("invalid hyper-parameter: {0}")]
    InvalidHyperParameter(String),
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed checkpoint: {0}")]
    MalformedCheckpoint(String),
}

pub type Result<T> = std::result::Result<T, NumericsError>;
