//! Training with the per-epoch learning-rate schedule, accuracy evaluation
//! in both settings, renaming ablations, metric logging and
//! nearest-neighbor queries over node embeddings.

mod eval;
mod metrics;
mod neighbors;
mod run;

pub use eval::{evaluate_records, EvalReport};
pub use metrics::MetricsLog;
pub use neighbors::{nearest_neighbors, NeighborHit};
pub use run::{load_model, save_model, train, LoadedModel, TrainOutcome, TrainRunConfig};

use crate::data::DataError;
use crate::model::ModelError;
use crate::nn::NnError;
use std::fmt;

#[derive(Debug)]
pub enum TrainError {
    Data(DataError),
    Model(ModelError),
    Nn(NnError),
    NanLoss { epoch: usize, batch: usize },
    NodeOutOfRange { node: usize, nodes: usize },
    BadRunConfig(String),
    Io(String),
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::Data(e) => write!(f, "{e}"),
            TrainError::Model(e) => write!(f, "{e}"),
            TrainError::Nn(e) => write!(f, "{e}"),
            TrainError::NanLoss { epoch, batch } => {
                write!(f, "loss became non-finite at epoch {epoch}, batch {batch}")
            }
            TrainError::NodeOutOfRange { node, nodes } => {
                write!(f, "node {node} out of range (graph has {nodes})")
            }
            TrainError::BadRunConfig(msg) => write!(f, "bad run config: {msg}"),
            TrainError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for TrainError {}

impl From<DataError> for TrainError {
    fn from(e: DataError) -> Self {
        TrainError::Data(e)
    }
}

impl From<ModelError> for TrainError {
    fn from(e: ModelError) -> Self {
        TrainError::Model(e)
    }
}

impl From<NnError> for TrainError {
    fn from(e: NnError) -> Self {
        TrainError::Nn(e)
    }
}

impl From<std::io::Error> for TrainError {
    fn from(e: std::io::Error) -> Self {
        TrainError::Io(e.to_string())
    }
}
