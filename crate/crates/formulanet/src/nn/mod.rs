//! Minimal dense linear algebra with reverse-mode automatic differentiation:
//! exactly the layer set the embedding network needs (affine, ReLU, batch
//! normalization with batch/running statistics, row max-pooling,
//! concatenation, gather/scatter for message passing, softmax cross-entropy)
//! plus an RMSProp optimizer with weight decay and a binary checkpoint
//! container. Training runs in f32 by default; gradient checks use f64.

mod checkpoint;
pub mod gradcheck;
mod matrix;
mod optim;
mod scalar;
mod store;
mod tape;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, CKPT_MAGIC};
pub use matrix::Matrix;
pub use optim::{update_running_stats, RmsProp, BN_MOMENTUM};
pub use scalar::{Dtype, Scalar};
pub use store::{ParamId, ParamStore};
pub use tape::{BnBatchStats, BnStats, Gradients, NodeId, Tape, BN_EPSILON};

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NnError {
    ShapeMismatch { op: &'static str, detail: String },
    BatchTooSmall { rows: usize },
    EmptyInput { op: &'static str },
    BackwardAlreadyRun,
    LossNotScalar,
    NonFinite { context: String },
    Io(String),
    BadCheckpoint(String),
}

impl fmt::Display for NnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NnError::ShapeMismatch { op, detail } => write!(f, "shape mismatch in {op}: {detail}"),
            NnError::BatchTooSmall { rows } => {
                write!(f, "batch-stats normalization needs at least 2 rows, got {rows}")
            }
            NnError::EmptyInput { op } => write!(f, "{op} on empty input"),
            NnError::BackwardAlreadyRun => write!(f, "backward already consumed this tape"),
            NnError::LossNotScalar => write!(f, "backward root must be a 1x1 value"),
            NnError::NonFinite { context } => write!(f, "non-finite value in {context}"),
            NnError::Io(msg) => write!(f, "i/o error: {msg}"),
            NnError::BadCheckpoint(msg) => write!(f, "bad checkpoint: {msg}"),
        }
    }
}

impl std::error::Error for NnError {}

impl From<std::io::Error> for NnError {
    fn from(e: std::io::Error) -> Self {
        NnError::Io(e.to_string())
    }
}
