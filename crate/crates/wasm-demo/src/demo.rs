//! JSON responses for the demo page.

use formulanet::graph::{
    build_graph, canonical_hash, enumerate_treelets, export_dot, rename_ast_variables, GraphMode,
};
use formulanet::hol::{parse_text, print, strip_turnstile};
use formulanet::model::{Model, ModelConfig, PreparedGraph, Setting, Vocabulary};
use formulanet::nn::ParamStore;
use serde::Serialize;

#[derive(Serialize)]
struct ErrorResponse {
    ok: bool,
    error: String,
}

fn error_json(message: impl ToString) -> String {
    serde_json::to_string(&ErrorResponse {
        ok: false,
        error: message.to_string(),
    })
    .expect("error response serializes")
}

#[derive(Serialize)]
struct NodeInfo {
    id: usize,
    name: String,
    kind: String,
}

#[derive(Serialize)]
struct EdgeInfo {
    src: usize,
    dst: usize,
    rank: usize,
}

#[derive(Serialize)]
struct GraphResponse {
    ok: bool,
    mode: String,
    nodes: Vec<NodeInfo>,
    edges: Vec<EdgeInfo>,
    treelets: usize,
    hash: String,
    dot: String,
    /// BFS depth per node, for the page's layered layout.
    depth: Vec<usize>,
}

pub fn graph_info(formula: &str, mode: &str) -> String {
    let Some(mode) = GraphMode::from_str(mode) else {
        return error_json(format!("unknown mode {mode:?}"));
    };
    let ast = match parse_text(strip_turnstile(formula)) {
        Ok(ast) => ast,
        Err(e) => return error_json(e),
    };
    let graph = build_graph(&ast, mode);

    // Layer nodes by BFS depth from the roots (nodes without incoming edges).
    let n = graph.node_count();
    let mut depth = vec![usize::MAX; n];
    let mut queue: std::collections::VecDeque<usize> = graph
        .node_ids()
        .filter(|&v| graph.in_degree(v) == 0)
        .collect();
    if queue.is_empty() && n > 0 {
        queue.push_back(0);
    }
    for &v in &queue {
        depth[v] = 0;
    }
    while let Some(v) = queue.pop_front() {
        for &w in graph.out(v) {
            if depth[w] == usize::MAX {
                depth[w] = depth[v] + 1;
                queue.push_back(w);
            }
        }
    }
    for d in &mut depth {
        if *d == usize::MAX {
            *d = 0;
        }
    }

    let response = GraphResponse {
        ok: true,
        mode: mode.as_str().to_string(),
        nodes: graph
            .node_ids()
            .map(|v| NodeInfo {
                id: v,
                name: graph.name(v).to_string(),
                kind: graph.kind(v).as_str().to_string(),
            })
            .collect(),
        edges: graph
            .edges()
            .map(|(src, rank, dst)| EdgeInfo { src, dst, rank })
            .collect(),
        treelets: enumerate_treelets(&graph).len(),
        hash: canonical_hash(&graph),
        dot: export_dot(&graph),
        depth,
    };
    serde_json::to_string(&response).expect("graph response serializes")
}

#[derive(Serialize)]
struct RenameResponse {
    ok: bool,
    renamed: String,
    full_hash_original: String,
    full_hash_renamed: String,
    full_invariant: bool,
    old_names_hash_original: String,
    old_names_hash_renamed: String,
    old_names_invariant: bool,
}

pub fn rename_demo(formula: &str, seed: u64) -> String {
    let ast = match parse_text(strip_turnstile(formula)) {
        Ok(ast) => ast,
        Err(e) => return error_json(e),
    };
    let renamed = rename_ast_variables(&ast, seed);
    let full_a = canonical_hash(&build_graph(&ast, GraphMode::Full));
    let full_b = canonical_hash(&build_graph(&renamed, GraphMode::Full));
    let old_a = canonical_hash(&build_graph(&ast, GraphMode::GraphOldNames));
    let old_b = canonical_hash(&build_graph(&renamed, GraphMode::GraphOldNames));
    let response = RenameResponse {
        ok: true,
        renamed: print(&renamed),
        full_invariant: full_a == full_b,
        full_hash_original: full_a,
        full_hash_renamed: full_b,
        old_names_invariant: old_a == old_b,
        old_names_hash_original: old_a,
        old_names_hash_renamed: old_b,
    };
    serde_json::to_string(&response).expect("rename response serializes")
}

#[derive(Serialize)]
struct OrderResponse {
    ok: bool,
    /// Infinity-norm distance of pooled embeddings under basic updates.
    basic_distance: f64,
    /// The same distance with the treelet update terms enabled.
    order_distance: f64,
}

fn pooled(x: &formulanet::nn::Matrix<f64>) -> Vec<f64> {
    (0..x.cols())
        .map(|j| {
            (0..x.rows())
                .map(|r| x.get(r, j))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

fn inf_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn order_sensitivity(formula_a: &str, formula_b: &str, seed: u64) -> String {
    let parse = |text: &str| parse_text(strip_turnstile(text));
    let (ast_a, ast_b) = match (parse(formula_a), parse(formula_b)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return error_json(e),
    };
    let graph_a = build_graph(&ast_a, GraphMode::Full);
    let graph_b = build_graph(&ast_b, GraphMode::Full);
    let mut names = Vec::new();
    for g in [&graph_a, &graph_b] {
        for v in g.node_ids() {
            names.push(g.name(v).to_string());
        }
    }
    let vocab = Vocabulary::build(names);
    let config = ModelConfig {
        dim: 16,
        steps: 1,
        order_preserving: true,
        update_hidden: 16,
        classifier_hidden: 16,
        vocab_size: vocab.len(),
        setting: Setting::Unconditional,
    };
    let mut store = ParamStore::<f64>::new();
    let model = match Model::init(config, &mut store, seed) {
        Ok(model) => model,
        Err(e) => return error_json(e),
    };
    let prepared_a = PreparedGraph::prepare(graph_a, &vocab);
    let prepared_b = PreparedGraph::prepare(graph_b, &vocab);

    let mut embed = |g: &PreparedGraph, order: bool| -> Result<Vec<f64>, String> {
        let s0 = model.initial_embeddings(&mut store, g).map_err(|e| e.to_string())?;
        let s1 = if order {
            model.update_step_order(&mut store, g, &s0)
        } else {
            model.update_step_basic(&mut store, g, &s0)
        }
        .map_err(|e| e.to_string())?;
        Ok(pooled(&s1.x))
    };
    let run = |embed: &mut dyn FnMut(&PreparedGraph, bool) -> Result<Vec<f64>, String>,
               order: bool|
     -> Result<f64, String> {
        let a = embed(&prepared_a, order)?;
        let b = embed(&prepared_b, order)?;
        Ok(inf_norm(&a, &b))
    };
    let basic = match run(&mut embed, false) {
        Ok(v) => v,
        Err(e) => return error_json(e),
    };
    let order = match run(&mut embed, true) {
        Ok(v) => v,
        Err(e) => return error_json(e),
    };
    serde_json::to_string(&OrderResponse {
        ok: true,
        basic_distance: basic,
        order_distance: order,
    })
    .expect("order response serializes")
}
