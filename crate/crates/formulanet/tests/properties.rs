//! Structural invariants checked over randomly generated closed formulas.

use formulanet::data::synth::random_closed_formula;
use formulanet::graph::{
    build_graph, parse_graph, serialize_graph, FormulaGraph, GraphMode, NodeKind,
};
use formulanet::hol::{parse_text, print, BINDERS, INFIX_OPS};
use formulanet::rng::SplitMix64;

fn random_graphs(seed: u64, count: usize, mode: GraphMode) -> Vec<FormulaGraph> {
    let mut rng = SplitMix64::new(seed);
    (0..count)
        .map(|_| build_graph(&random_closed_formula(&mut rng, 5), mode))
        .collect()
}

#[test]
fn tree_modes_are_trees() {
    for mode in [GraphMode::TreeOldNames, GraphMode::TreeRenamed] {
        for g in random_graphs(0xA0, 300, mode) {
            assert_eq!(g.edge_count(), g.node_count() - 1, "|E| = |V| - 1");
            let roots = g.node_ids().filter(|&v| g.in_degree(v) == 0).count();
            assert_eq!(roots, 1, "exactly one root");
            for v in g.node_ids() {
                assert!(g.in_degree(v) <= 1, "tree nodes have at most one parent");
            }
        }
    }
}

#[test]
fn merging_only_shrinks() {
    let mut rng = SplitMix64::new(0xA1);
    for _ in 0..300 {
        let ast = random_closed_formula(&mut rng, 5);
        let tree = build_graph(&ast, GraphMode::TreeOldNames);
        for mode in [GraphMode::Full, GraphMode::GraphOldNames] {
            let merged = build_graph(&ast, mode);
            assert!(
                merged.node_count() <= tree.node_count(),
                "{mode:?} node count must not exceed the tree's"
            );
        }
    }
}

#[test]
fn quantifier_out_neighbors_bounded() {
    for g in random_graphs(0xA2, 300, GraphMode::Full) {
        for v in g.node_ids() {
            if g.kind(v) == NodeKind::Quantifier {
                let mut distinct: Vec<usize> = g.out(v).to_vec();
                distinct.sort_unstable();
                distinct.dedup();
                assert!(
                    (1..=2).contains(&distinct.len()),
                    "quantifier {v} has {} distinct out-neighbors",
                    distinct.len()
                );
            }
        }
    }
}

#[test]
fn full_mode_names_are_erased_to_known_tokens() {
    for g in random_graphs(0xA3, 300, GraphMode::Full) {
        for v in g.node_ids() {
            let name = g.name(v);
            let allowed = match g.kind(v) {
                NodeKind::VarValue => name == "VAR",
                NodeKind::VarFunc => name == "VARFUNC",
                NodeKind::Quantifier => BINDERS.contains(&name),
                _ => !name.is_empty() && name != "VAR" && name != "VARFUNC",
            };
            assert!(allowed, "node {v} named {name:?} with kind {:?}", g.kind(v));
        }
    }
}

#[test]
fn in_edges_always_transpose_out_edges() {
    for mode in GraphMode::ALL {
        for g in random_graphs(0xA4, 100, mode) {
            for v in g.node_ids() {
                for &(src, rank) in g.incoming(v) {
                    assert_eq!(g.out(src)[rank - 1], v);
                }
            }
            let out_total: usize = g.node_ids().map(|v| g.out_degree(v)).sum();
            let in_total: usize = g.node_ids().map(|v| g.in_degree(v)).sum();
            assert_eq!(out_total, in_total);
        }
    }
}

#[test]
fn wire_format_round_trips_random_graphs() {
    for mode in GraphMode::ALL {
        for g in random_graphs(0xA5, 60, mode) {
            let back = parse_graph(&serialize_graph(&g)).unwrap();
            assert_eq!(g, back);
        }
    }
}

#[test]
fn printer_round_trips_random_closed_formulas() {
    let mut rng = SplitMix64::new(0xA6);
    for _ in 0..400 {
        let ast = random_closed_formula(&mut rng, 6);
        let reparsed = parse_text(&print(&ast)).unwrap();
        assert_eq!(reparsed, ast);
    }
}

#[test]
fn infix_heads_never_leak_into_closure() {
    // Closing a random formula never quantifies over operator lexemes.
    let mut rng = SplitMix64::new(0xA7);
    for _ in 0..200 {
        let ast = random_closed_formula(&mut rng, 5);
        let closed = ast.close(&|_| false);
        let mut names = std::collections::HashSet::new();
        closed.all_names(&mut names);
        for op in INFIX_OPS {
            let quantified = count_binders_named(&closed, op);
            assert_eq!(quantified, 0, "operator {op} must not be closed over");
        }
    }
}

fn count_binders_named(ast: &formulanet::hol::Ast, name: &str) -> usize {
    use formulanet::hol::Ast;
    match ast {
        Ast::Leaf { .. } => 0,
        Ast::Apply { args, .. } => args.iter().map(|a| count_binders_named(a, name)).sum(),
        Ast::Quantifier { var, body, .. } => {
            usize::from(var == name) + count_binders_named(body, name)
        }
    }
}

#[test]
fn graphs_are_shareable_across_threads() {
    // Construction of distinct graphs in parallel; finished graphs shared.
    let mut rng = SplitMix64::new(0xA8);
    let formulas: Vec<String> = (0..32)
        .map(|_| print(&random_closed_formula(&mut rng, 5)))
        .collect();
    let handles: Vec<_> = formulas
        .chunks(8)
        .map(|chunk| {
            let chunk = chunk.to_vec();
            std::thread::spawn(move || {
                chunk
                    .iter()
                    .map(|text| {
                        let ast = parse_text(text).unwrap();
                        build_graph(&ast, GraphMode::Full).node_count()
                    })
                    .sum::<usize>()
            })
        })
        .collect();
    let total: usize = handles.into_iter().map(|h| h.join().unwrap()).sum();
    assert!(total > 0);
}
