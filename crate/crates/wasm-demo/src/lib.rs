//! Browser bindings for the interactive demo page. Every export takes plain
//! strings and returns a JSON string, so the page needs no framework. The
//! JSON-producing logic lives in [`demo`] and is tested on the host target.

pub mod demo;

use wasm_bindgen::prelude::*;

/// Compile a formula to a graph: nodes, ranked edges, counts, DOT text and
/// the canonical hash. `mode` is one of full, tree-old-names, tree-renamed,
/// graph-old-names.
#[wasm_bindgen]
pub fn graph_info(formula: &str, mode: &str) -> String {
    demo::graph_info(formula, mode)
}

/// Rename all bound variables with the seed and compare canonical hashes in
/// full and graph-old-names modes.
#[wasm_bindgen]
pub fn rename_demo(formula: &str, seed: u64) -> String {
    demo::rename_demo(formula, seed)
}

/// Embed two formulas with one shared randomly-initialized model (T = 1)
/// and report how far the pooled embeddings are under basic and
/// order-preserving updates.
#[wasm_bindgen]
pub fn order_sensitivity(formula_a: &str, formula_b: &str, seed: u64) -> String {
    demo::order_sensitivity(formula_a, formula_b, seed)
}
