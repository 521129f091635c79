//! Accuracy evaluation per step head, with an optional variable-renaming
//! pass over every formula (the ablation's "renamed validation").

use super::TrainError;
use crate::data::{ConjectureRecord, GraphCache};
use crate::graph::{rename_ast_variables, GraphMode};
use crate::model::{Ctx, Model, PairExample, Phase, PreparedGraph, Setting, Vocabulary};
use crate::nn::{ParamStore, Scalar, Tape};
use std::sync::Arc;

const EVAL_CHUNK: usize = 64;

#[derive(Debug, Clone)]
pub struct EvalReport {
    /// Accuracy of each intermediate head, index = step.
    pub per_head_accuracy: Vec<f64>,
    pub pairs: usize,
    /// How many conjecture graphs were constructed; stays 0 in the
    /// unconditional setting.
    pub conjecture_graphs_built: usize,
}

impl EvalReport {
    /// The reported number: the last head's accuracy.
    pub fn final_accuracy(&self) -> f64 {
        *self.per_head_accuracy.last().expect("at least one head")
    }
}

/// Evaluates every pair of `records`. `rename_seed` renames bound variables
/// in every formula before graph construction.
pub fn evaluate_records<S: Scalar>(
    model: &Model,
    store: &mut ParamStore<S>,
    vocab: &Vocabulary,
    records: &[ConjectureRecord],
    graph_mode: GraphMode,
    rename_seed: Option<u64>,
) -> Result<EvalReport, TrainError> {
    let conditional = model.config.setting == Setting::Conditional;
    let mut stmt_cache = GraphCache::new(graph_mode);
    let mut conj_graphs: Vec<Option<Arc<PreparedGraph>>> = vec![None; records.len()];
    let mut conjecture_graphs_built = 0usize;

    // Collect all (conjecture graph, statement graph, label) triples.
    let mut pairs: Vec<(Option<Arc<PreparedGraph>>, Arc<PreparedGraph>, usize)> = Vec::new();
    for (r, record) in records.iter().enumerate() {
        let conj = if conditional {
            if conj_graphs[r].is_none() {
                let ast = match rename_seed {
                    Some(seed) => rename_ast_variables(&record.conjecture, seed ^ (r as u64)),
                    None => record.conjecture.clone(),
                };
                let graph = crate::graph::build_graph(&ast, graph_mode);
                conj_graphs[r] = Some(Arc::new(PreparedGraph::prepare(graph, vocab)));
                conjecture_graphs_built += 1;
            }
            conj_graphs[r].clone()
        } else {
            None
        };
        for (stmt, label) in record
            .positives
            .iter()
            .map(|s| (s, 1usize))
            .chain(record.negatives.iter().map(|s| (s, 0usize)))
        {
            let graph = match rename_seed {
                Some(seed) => {
                    let renamed = rename_ast_variables(&stmt.ast, seed);
                    let graph = crate::graph::build_graph(&renamed, graph_mode);
                    Arc::new(PreparedGraph::prepare(graph, vocab))
                }
                None => stmt_cache.prepared(&stmt.text, &stmt.ast, vocab),
            };
            pairs.push((conj.clone(), graph, label));
        }
    }

    let heads = model.config.steps + 1;
    let mut correct = vec![0usize; heads];
    for chunk in pairs.chunks(EVAL_CHUNK) {
        let mut tape = Tape::new();
        let mut ctx = Ctx::new(&mut tape, store, Phase::Eval, false);
        let examples: Vec<PairExample> = chunk
            .iter()
            .map(|(conj, stmt, label)| PairExample {
                conjecture: conj.as_deref(),
                statement: stmt,
                label: *label,
            })
            .collect();
        let out = model.batch_forward(&mut ctx, &examples)?;
        for (t, &logits) in out.step_logits.iter().enumerate() {
            let lv = tape.value(logits);
            for (row, (_, _, label)) in chunk.iter().enumerate() {
                let pred = usize::from(lv.get(row, 1) > lv.get(row, 0));
                if pred == *label {
                    correct[t] += 1;
                }
            }
        }
    }

    let total = pairs.len().max(1);
    Ok(EvalReport {
        per_head_accuracy: correct.iter().map(|&c| c as f64 / total as f64).collect(),
        pairs: pairs.len(),
        conjecture_graphs_built,
    })
}
