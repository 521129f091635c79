//! Premise-selection pipeline: higher-order-logic formulas are compiled into
//! variable-rename-invariant graphs, embedded by order-preserving message
//! passing, and classified as useful / not useful for a conjecture.
//!
//! The crate is organized along the pipeline:
//!
//! * [`hol`] — tokenizer and parser for a HOL-Light-like surface syntax,
//!   plus free-variable closure.
//! * [`graph`] — formula graphs (constant merging, variable merging and
//!   renaming), treelet enumeration, canonical hashing, DOT export.
//! * [`nn`] — dense matrices with reverse-mode autodiff, batch
//!   normalization, RMSProp, and a checkpoint container.
//! * [`model`] — the embedding network: token projection, per-step update
//!   functions, max-pool readout, classifier heads, intermediate
//!   supervision.
//! * [`data`] — HolStep-format ingestion, vocabulary building, splits,
//!   shuffled pair batching, and a synthetic corpus generator.
//! * [`train`] — training loop with the learning-rate schedule, accuracy
//!   evaluation, renaming ablations, and nearest-neighbor queries.

pub mod data;
pub mod graph;
pub mod hol;
pub mod model;
pub mod nn;
pub mod rng;
pub mod train;
