//! The embedding network: token projection, T steps of neighbor updates
//! (with optional order-preserving treelet terms), max-pool readout,
//! per-step classifier heads and the summed intermediate-supervision loss.

mod config;
mod embed;
mod net;
mod vocab;

pub use config::ModelConfig;
pub use embed::{
    BatchOut, EmbedNodes, EmbedOutput, EmbeddingState, GraphAux, Model, PairExample,
    PreparedGraph,
};
pub use net::{Ctx, Phase};
pub use vocab::{Vocabulary, UNKNOWN_TOKEN};


use crate::nn::NnError;
use std::fmt;

/// Whether classification sees the conjecture embedding or only the
/// statement embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setting {
    Conditional,
    Unconditional,
}

impl Setting {
    pub fn as_str(self) -> &'static str {
        match self {
            Setting::Conditional => "conditional",
            Setting::Unconditional => "unconditional",
        }
    }

    pub fn from_str(s: &str) -> Option<Setting> {
        match s {
            "conditional" => Some(Setting::Conditional),
            "unconditional" => Some(Setting::Unconditional),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    Nn(NnError),
    StepExhausted { step: usize, total: usize },
    MissingConjecture,
    VocabMismatch { expected: usize, got: usize },
    BadConfig(String),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::Nn(e) => write!(f, "{e}"),
            ModelError::StepExhausted { step, total } => {
                write!(f, "update step {step} out of range (model has {total})")
            }
            ModelError::MissingConjecture => {
                write!(f, "conditional classification needs a conjecture embedding")
            }
            ModelError::VocabMismatch { expected, got } => {
                write!(f, "vocabulary size mismatch: model expects {expected}, data has {got}")
            }
            ModelError::BadConfig(msg) => write!(f, "bad model config: {msg}"),
        }
    }
}

impl std::error::Error for ModelError {}

impl From<NnError> for ModelError {
    fn from(e: NnError) -> Self {
        ModelError::Nn(e)
    }
}
