//! HolStep-format ingestion, vocabulary building, split management,
//! shuffled pair batching and a synthetic corpus generator for desk-scale
//! runs (the real dataset is a separate download).

mod batch;
mod holstep;
mod splits;
pub mod synth;

pub use batch::{batch_stream, GraphCache, PairRef};
pub use holstep::{
    load_split, parse_holstep_file, ConjectureRecord, ParseOptions, Statement,
};
pub use splits::{make_splits, read_manifest, write_manifest, SplitManifest};

use crate::graph::GraphMode;
use crate::model::Vocabulary;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DataError {
    Io(String),
    MalformedLine { path: String, line: usize, reason: String },
    UnparseableFormula { path: String, line: usize, detail: String },
    InsufficientConjectures { have: usize, need: usize },
    BadManifest { line: usize, reason: String },
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataError::Io(msg) => write!(f, "i/o error: {msg}"),
            DataError::MalformedLine { path, line, reason } => {
                write!(f, "{path}:{line}: malformed line: {reason}")
            }
            DataError::UnparseableFormula { path, line, detail } => {
                write!(f, "{path}:{line}: unparseable formula: {detail}")
            }
            DataError::InsufficientConjectures { have, need } => {
                write!(f, "need more than {need} conjectures, have {have}")
            }
            DataError::BadManifest { line, reason } => {
                write!(f, "manifest line {line}: {reason}")
            }
        }
    }
}

impl std::error::Error for DataError {}

impl From<std::io::Error> for DataError {
    fn from(e: std::io::Error) -> Self {
        DataError::Io(e.to_string())
    }
}

/// Collects every node name from the graphs of the given records (built in
/// `mode`) and builds the vocabulary: sorted constants plus the reserved
/// tokens. Only call this on the training split.
pub fn build_vocab(records: &[ConjectureRecord], mode: GraphMode) -> Vocabulary {
    let mut names = Vec::new();
    for record in records {
        let mut collect = |ast: &crate::hol::Ast| {
            let graph = crate::graph::build_graph(ast, mode);
            for v in graph.node_ids() {
                names.push(graph.name(v).to_string());
            }
        };
        collect(&record.conjecture);
        for stmt in record.positives.iter().chain(&record.negatives) {
            collect(&stmt.ast);
        }
    }
    Vocabulary::build(names)
}
