//! DOT export for rendering formula graphs.

use super::FormulaGraph;
use std::fmt::Write;

fn escape(label: &str) -> String {
    label.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Emits a DOT digraph; edge labels carry the rank of each outgoing edge.
pub fn export_dot(graph: &FormulaGraph) -> String {
    let mut out = String::from("digraph {\n");
    for v in graph.node_ids() {
        let _ = writeln!(out, "  n{} [label=\"{}\"];", v, escape(graph.name(v)));
    }
    for (src, rank, dst) in graph.edges() {
        let _ = writeln!(out, "  n{src} -> n{dst} [label=\"{rank}\"];");
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, GraphMode};
    use crate::hol::parse_text;

    #[test]
    fn single_node() {
        let g = build_graph(&parse_text("c").unwrap(), GraphMode::Full);
        let dot = export_dot(&g);
        assert!(dot.starts_with("digraph {"));
        assert!(dot.contains("n0 [label=\"c\"];"));
        assert!(!dot.contains("->"));
    }

    #[test]
    fn fig1_counts() {
        let g = build_graph(
            &parse_text("!x. ?y. P x /\\ Q x y").unwrap(),
            GraphMode::Full,
        );
        let dot = export_dot(&g);
        let node_lines = dot.lines().filter(|l| l.contains("[label=") && !l.contains("->")).count();
        let edge_lines = dot.lines().filter(|l| l.contains("->")).count();
        assert_eq!(node_lines, 7);
        assert_eq!(edge_lines, 9);
    }

    #[test]
    fn labels_are_escaped() {
        let g = build_graph(&parse_text("a /\\ b").unwrap(), GraphMode::Full);
        let dot = export_dot(&g);
        assert!(dot.contains("label=\"/\\\\\""), "{dot}");
    }

    #[test]
    fn edge_labels_carry_ranks() {
        let g = build_graph(&parse_text("f a b").unwrap(), GraphMode::Full);
        let dot = export_dot(&g);
        assert!(dot.contains("[label=\"1\"]"));
        assert!(dot.contains("[label=\"2\"]"));
    }
}
