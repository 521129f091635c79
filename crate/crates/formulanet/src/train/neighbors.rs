//! Nearest-neighbor queries over per-node embeddings at a chosen step.

use super::TrainError;
use crate::model::{Model, ModelError, PreparedGraph};
use crate::nn::{ParamStore, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborHit {
    pub graph_index: usize,
    pub node: usize,
    pub distance: f64,
}

/// Top-k corpus nodes by Euclidean distance to the query node's step-`step`
/// embedding. Ties resolve by corpus order (graph index, then node id).
pub fn nearest_neighbors<S: Scalar>(
    model: &Model,
    store: &mut ParamStore<S>,
    query: (&PreparedGraph, usize),
    corpus: &[&PreparedGraph],
    k: usize,
    step: usize,
) -> Result<Vec<NeighborHit>, TrainError> {
    let (query_graph, query_node) = query;
    if step > model.config.steps {
        return Err(TrainError::Model(ModelError::StepExhausted {
            step,
            total: model.config.steps,
        }));
    }
    if query_node >= query_graph.graph.node_count() {
        return Err(TrainError::NodeOutOfRange {
            node: query_node,
            nodes: query_graph.graph.node_count(),
        });
    }
    let query_out = model.embed_graph(store, query_graph)?;
    let query_row: Vec<f64> = query_out.states[step]
        .row(query_node)
        .iter()
        .map(|v| v.to_f64())
        .collect();

    let mut hits = Vec::new();
    for (gi, graph) in corpus.iter().enumerate() {
        let out = model.embed_graph(store, graph)?;
        let state = &out.states[step];
        for node in 0..state.rows() {
            let dist: f64 = state
                .row(node)
                .iter()
                .zip(&query_row)
                .map(|(v, q)| (v.to_f64() - q).powi(2))
                .sum::<f64>()
                .sqrt();
            hits.push(NeighborHit {
                graph_index: gi,
                node,
                distance: dist,
            });
        }
    }
    hits.sort_by(|a, b| {
        a.distance
            .partial_cmp(&b.distance)
            .unwrap()
            .then(a.graph_index.cmp(&b.graph_index))
            .then(a.node.cmp(&b.node))
    });
    hits.truncate(k);
    Ok(hits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, GraphMode};
    use crate::hol::parse_text;
    use crate::model::{ModelConfig, Setting, Vocabulary};

    fn setup() -> (Model, ParamStore<f64>, Vocabulary) {
        let vocab = Vocabulary::build(
            ["P", "Q", "R", "S", "/\\", "!"].map(String::from),
        );
        let config = ModelConfig {
            dim: 8,
            steps: 1,
            order_preserving: false,
            update_hidden: 8,
            classifier_hidden: 8,
            vocab_size: vocab.len(),
            setting: Setting::Unconditional,
        };
        let mut store = ParamStore::new();
        let model = Model::init(config, &mut store, 77).unwrap();
        (model, store, vocab)
    }

    fn prep(text: &str, vocab: &Vocabulary) -> PreparedGraph {
        PreparedGraph::prepare(build_graph(&parse_text(text).unwrap(), GraphMode::Full), vocab)
    }

    #[test]
    fn self_match_ranks_first_with_zero_distance() {
        let (model, mut store, vocab) = setup();
        let g = prep("!x. P x", &vocab);
        let other = prep("!x. Q x", &vocab);
        let corpus = vec![&other, &g];
        let hits =
            nearest_neighbors(&model, &mut store, (&g, 0), &corpus, 3, 1).unwrap();
        assert_eq!(hits[0].graph_index, 1);
        assert_eq!(hits[0].node, 0);
        assert!(hits[0].distance < 1e-12);
    }

    #[test]
    fn k_larger_than_corpus_returns_everything() {
        let (model, mut store, vocab) = setup();
        let g = prep("P c", &vocab);
        let corpus = vec![&g];
        let hits =
            nearest_neighbors(&model, &mut store, (&g, 0), &corpus, 100, 0).unwrap();
        assert_eq!(hits.len(), g.graph.node_count());
    }

    #[test]
    fn isomorphic_local_contexts_coincide_at_step_1() {
        // (!x. P x) /\ (!y. P y): the two VAR nodes see identical
        // neighborhoods and share batch statistics, so their step-1
        // embeddings are identical.
        let (model, mut store, vocab) = setup();
        let g = prep("(!x. P x) /\\ (!y. P y)", &vocab);
        let vars: Vec<usize> = g
            .graph
            .node_ids()
            .filter(|&v| g.graph.name(v) == "VAR")
            .collect();
        assert_eq!(vars.len(), 2);
        let corpus = vec![&g];
        let hits =
            nearest_neighbors(&model, &mut store, (&g, vars[0]), &corpus, 2, 1).unwrap();
        assert_eq!(hits[0].distance, 0.0, "self match");
        assert!(hits[1].distance < 1e-9, "twin VAR node at distance ~0");
        assert_eq!(hits[1].node, vars[1]);
    }

    #[test]
    fn node_out_of_range_and_step_exhausted() {
        let (model, mut store, vocab) = setup();
        let g = prep("P c", &vocab);
        let corpus = vec![&g];
        assert!(matches!(
            nearest_neighbors(&model, &mut store, (&g, 99), &corpus, 1, 0),
            Err(TrainError::NodeOutOfRange { .. })
        ));
        assert!(matches!(
            nearest_neighbors(&model, &mut store, (&g, 0), &corpus, 1, 5),
            Err(TrainError::Model(ModelError::StepExhausted { .. }))
        ));
    }
}
