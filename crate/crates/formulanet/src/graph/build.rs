//! Parse-tree to graph compilation.
//!
//! Full mode applies, in order: (1) tree construction where internal nodes
//! are functions/quantifiers and leaves are values; (2) merging of equal
//! constant nodes; (3) per binder, a body edge plus a single binding edge to
//! the merged variable node; (4) renaming variables to VAR/VARFUNC. The
//! ablation modes stop early: tree-old-names after (1), tree-renamed does
//! (1)+(4) per occurrence, graph-old-names does (1)-(3).

use super::{FormulaGraph, GraphError, GraphMode, NodeKind, VARFUNC_TOKEN, VAR_TOKEN};
use crate::hol::Ast;

struct RawNode {
    name: String,
    kind: NodeKind,
    outs: Vec<usize>,
}

struct Binder {
    quant: usize,
    occurrences: Vec<usize>,
    any_function: bool,
}

struct TreeBuild {
    nodes: Vec<RawNode>,
    binders: Vec<Binder>,
}

impl TreeBuild {
    fn push(&mut self, name: &str, kind: NodeKind) -> usize {
        self.nodes.push(RawNode {
            name: name.to_string(),
            kind,
            outs: Vec::new(),
        });
        self.nodes.len() - 1
    }

    /// Builds the parse tree, resolving every name against the enclosing
    /// binder stack (innermost first). Returns the head node of `ast`.
    fn walk(&mut self, ast: &Ast, scope: &mut Vec<(String, usize)>) -> usize {
        match ast {
            Ast::Leaf { name } => {
                let binder = lookup(scope, name);
                let kind = if binder.is_some() {
                    NodeKind::VarValue
                } else {
                    NodeKind::ConstValue
                };
                let id = self.push(name, kind);
                if let Some(b) = binder {
                    self.binders[b].occurrences.push(id);
                }
                id
            }
            Ast::Apply { head, args } => {
                let binder = lookup(scope, head);
                let kind = if binder.is_some() {
                    NodeKind::VarFunc
                } else {
                    NodeKind::ConstFunc
                };
                let id = self.push(head, kind);
                if let Some(b) = binder {
                    self.binders[b].occurrences.push(id);
                    self.binders[b].any_function = true;
                }
                for arg in args {
                    let child = self.walk(arg, scope);
                    self.nodes[id].outs.push(child);
                }
                id
            }
            Ast::Quantifier { binder, var, body } => {
                let id = self.push(binder, NodeKind::Quantifier);
                self.binders.push(Binder {
                    quant: id,
                    occurrences: Vec::new(),
                    any_function: false,
                });
                let binder_idx = self.binders.len() - 1;
                scope.push((var.clone(), binder_idx));
                let head = self.walk(body, scope);
                scope.pop();
                self.nodes[id].outs.push(head);
                id
            }
        }
    }
}

fn lookup(scope: &[(String, usize)], name: &str) -> Option<usize> {
    scope
        .iter()
        .rev()
        .find(|(var, _)| var == name)
        .map(|&(_, idx)| idx)
}

/// Compiles a formula into a graph. Names not bound by any binder are
/// treated as constants, so the result is always well defined; use
/// [`build_graph_closed`] to enforce the closed-formula precondition.
pub fn build_graph(ast: &Ast, mode: GraphMode) -> FormulaGraph {
    let mut tree = TreeBuild {
        nodes: Vec::new(),
        binders: Vec::new(),
    };
    tree.walk(ast, &mut Vec::new());

    if mode.is_tree() {
        let rename = mode == GraphMode::TreeRenamed;
        let (names, kinds, outs) = tree
            .nodes
            .into_iter()
            .map(|n| {
                let name = match n.kind {
                    NodeKind::VarFunc if rename => VARFUNC_TOKEN.to_string(),
                    NodeKind::VarValue if rename => VAR_TOKEN.to_string(),
                    _ => n.name,
                };
                (name, n.kind, n.outs)
            })
            .fold((Vec::new(), Vec::new(), Vec::new()), |mut acc, (a, b, c)| {
                acc.0.push(a);
                acc.1.push(b);
                acc.2.push(c);
                acc
            });
        return FormulaGraph::from_parts(mode, names, kinds, outs);
    }

    merged_graph(tree, mode)
}

/// Merging pipeline for `Full` and `GraphOldNames`.
fn merged_graph(tree: TreeBuild, mode: GraphMode) -> FormulaGraph {
    let n = tree.nodes.len();
    // repr[i] = raw id of the class representative (first member).
    let mut repr: Vec<usize> = (0..n).collect();

    // Constant nodes with equal names merge globally, function or value.
    let mut first_const: std::collections::HashMap<&str, usize> = std::collections::HashMap::new();
    for (id, node) in tree.nodes.iter().enumerate() {
        if node.kind.is_constant() {
            let head = *first_const.entry(node.name.as_str()).or_insert(id);
            repr[id] = head;
        }
    }

    // All occurrences of one binder's variable merge into the first one.
    for binder in &tree.binders {
        if let Some((&head, rest)) = binder.occurrences.split_first() {
            for &occ in rest {
                repr[occ] = head;
            }
        }
    }

    // Compact representatives to final ids in first-appearance order.
    let mut final_id = vec![usize::MAX; n];
    let mut names = Vec::new();
    let mut kinds = Vec::new();
    for raw in 0..n {
        if repr[raw] == raw {
            final_id[raw] = names.len();
            names.push(tree.nodes[raw].name.clone());
            kinds.push(tree.nodes[raw].kind);
        }
    }
    let to_final = |raw: usize| final_id[repr[raw]];

    // Merged-class kinds: function wins over value.
    for (id, node) in tree.nodes.iter().enumerate() {
        let f = to_final(id);
        if node.kind == NodeKind::ConstFunc && kinds[f] == NodeKind::ConstValue {
            kinds[f] = NodeKind::ConstFunc;
        }
    }
    for binder in &tree.binders {
        if binder.any_function {
            if let Some(&head) = binder.occurrences.first() {
                kinds[to_final(head)] = NodeKind::VarFunc;
            }
        }
    }

    // Out-edges: concatenate member lists in raw order, then append one
    // binding edge per binder with at least one occurrence.
    let mut outs: Vec<Vec<usize>> = vec![Vec::new(); names.len()];
    for (id, node) in tree.nodes.iter().enumerate() {
        let f = to_final(id);
        for &dst in &node.outs {
            outs[f].push(to_final(dst));
        }
    }
    for binder in &tree.binders {
        if let Some(&head) = binder.occurrences.first() {
            outs[to_final(binder.quant)].push(to_final(head));
        }
    }

    if mode == GraphMode::Full {
        for (f, kind) in kinds.iter().enumerate() {
            match kind {
                NodeKind::VarValue => names[f] = VAR_TOKEN.to_string(),
                NodeKind::VarFunc => names[f] = VARFUNC_TOKEN.to_string(),
                _ => {}
            }
        }
    }

    FormulaGraph::from_parts(mode, names, kinds, outs)
}

/// Checked entry point: requires a closed formula (no free variables
/// under the caller's constant vocabulary).
pub fn build_graph_closed(
    ast: &Ast,
    mode: GraphMode,
    is_constant: &dyn Fn(&str) -> bool,
) -> Result<FormulaGraph, GraphError> {
    if let Some(free) = ast.free_variables(is_constant).into_iter().next() {
        return Err(GraphError::FreeVariable(free));
    }
    Ok(build_graph(ast, mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hol::parse_text;

    fn graph(text: &str, mode: GraphMode) -> FormulaGraph {
        build_graph(&parse_text(text).unwrap(), mode)
    }

    fn edge_set(g: &FormulaGraph) -> Vec<(String, usize, String)> {
        g.edges()
            .map(|(s, r, d)| (g.name(s).to_string(), r, g.name(d).to_string()))
            .collect()
    }

    #[test]
    fn fig1_full_graph() {
        let g = graph("!x. ?y. P x /\\ Q x y", GraphMode::Full);
        assert_eq!(g.node_count(), 7);
        assert_eq!(g.edge_count(), 9);
        let names: Vec<&str> = g.node_ids().map(|v| g.name(v)).collect();
        assert_eq!(names, vec!["!", "?", "/\\", "P", "VAR", "Q", "VAR"]);
        // VAR at id 4 is the x slot, id 6 the y slot.
        let edges = edge_set(&g);
        let expect = |s: &str, r: usize, d: &str| {
            assert!(
                edges.contains(&(s.to_string(), r, d.to_string())),
                "missing edge {s} -{r}-> {d} in {edges:?}"
            );
        };
        expect("!", 1, "?");
        expect("!", 2, "VAR");
        expect("?", 1, "/\\");
        expect("?", 2, "VAR");
        expect("/\\", 1, "P");
        expect("/\\", 2, "Q");
        expect("P", 1, "VAR");
        expect("Q", 1, "VAR");
        expect("Q", 2, "VAR");
        // The two VAR slots stay distinct nodes.
        assert_eq!(g.out(5), &[4, 6], "Q points at x-slot then y-slot");
        assert_eq!(g.out(0), &[1, 4], "forall binds the x slot");
        assert_eq!(g.out(1), &[2, 6], "exists binds the y slot");
    }

    #[test]
    fn fig2_full_graph_shares_varfunc() {
        let g = graph("!f. ?x. f x c /\\ P f", GraphMode::Full);
        assert_eq!(g.node_count(), 7);
        assert_eq!(g.edge_count(), 9);
        let names: Vec<&str> = g.node_ids().map(|v| g.name(v)).collect();
        assert_eq!(names, vec!["!", "?", "/\\", "VARFUNC", "VAR", "c", "P"]);
        assert_eq!(g.kind(3), NodeKind::VarFunc);
        // f is shared: used as a function (f x c) and as a value (P f).
        assert_eq!(g.out(3), &[4, 5]);
        let p = 6;
        assert_eq!(g.out(p), &[3]);
        assert_eq!(g.in_degree(3), 3, "from /\\, from P, from !");
    }

    #[test]
    fn single_leaf_any_mode() {
        for mode in GraphMode::ALL {
            let g = graph("c", mode);
            assert_eq!(g.node_count(), 1);
            assert_eq!(g.edge_count(), 0);
            assert_eq!(g.name(0), "c");
            assert_eq!(g.kind(0), NodeKind::ConstValue);
        }
    }

    #[test]
    fn fig1_tree_old_names_keeps_occurrences() {
        let g = graph("!x. ?y. P x /\\ Q x y", GraphMode::TreeOldNames);
        assert_eq!(g.node_count(), 8);
        assert_eq!(g.edge_count(), 7);
        let mut names: Vec<&str> = g.node_ids().map(|v| g.name(v)).collect();
        names.sort_unstable();
        assert_eq!(names, vec!["!", "/\\", "?", "P", "Q", "x", "x", "y"]);
    }

    #[test]
    fn tree_renamed_renames_per_occurrence() {
        let g = graph("!f. ?x. f x c /\\ P f", GraphMode::TreeRenamed);
        assert_eq!(g.node_count(), 8);
        assert_eq!(g.edge_count(), 7);
        let mut names: Vec<&str> = g.node_ids().map(|v| g.name(v)).collect();
        names.sort_unstable();
        // The function occurrence of f and the value occurrence get
        // different tokens because they are not merged.
        assert_eq!(names, vec!["!", "/\\", "?", "P", "VAR", "VAR", "VARFUNC", "c"]);
    }

    #[test]
    fn graph_old_names_merges_but_keeps_names() {
        let g = graph("!x. ?y. P x /\\ Q x y", GraphMode::GraphOldNames);
        assert_eq!(g.node_count(), 7);
        assert_eq!(g.edge_count(), 9);
        let names: Vec<&str> = g.node_ids().map(|v| g.name(v)).collect();
        assert!(names.contains(&"x"));
        assert!(names.contains(&"y"));
        assert!(!names.contains(&"VAR"));
    }

    #[test]
    fn repeated_argument_keeps_parallel_edges() {
        let g = graph("!x. f x x", GraphMode::Full);
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 4);
        let f = g.node_ids().find(|&v| g.name(v) == "f").unwrap();
        let var = g.node_ids().find(|&v| g.name(v) == "VAR").unwrap();
        assert_eq!(g.out(f), &[var, var], "f(x,x) keeps two ranked edges");
    }

    #[test]
    fn repeated_constant_functions_merge_globally() {
        // a /\ b /\ c parses as /\(a, /\(b, c)); the two conjunction nodes
        // merge into one, producing a self-loop.
        let g = graph("a /\\ b /\\ c", GraphMode::Full);
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.edge_count(), 4);
        let conj = g.node_ids().find(|&v| g.name(v) == "/\\").unwrap();
        assert_eq!(g.out(conj).len(), 4);
        assert!(g.out(conj).contains(&conj), "merged head self-loop");
    }

    #[test]
    fn shared_constant_leaf_merges() {
        let g = graph("P c /\\ Q c", GraphMode::Full);
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.edge_count(), 4);
        let c = g.node_ids().find(|&v| g.name(v) == "c").unwrap();
        assert_eq!(g.in_degree(c), 2);
    }

    #[test]
    fn constant_in_function_and_value_position() {
        let g = graph("P c /\\ f P", GraphMode::Full);
        let p = g.node_ids().find(|&v| g.name(v) == "P").unwrap();
        assert_eq!(g.kind(p), NodeKind::ConstFunc, "function position wins");
        assert_eq!(g.in_degree(p), 2);
        assert_eq!(g.out_degree(p), 1);
    }

    #[test]
    fn vacuous_binder_has_no_binding_edge() {
        let g = graph("!x. P", GraphMode::Full);
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.out(0), &[1]);
    }

    #[test]
    fn identity_binder_keeps_body_and_binding_edges() {
        let g = graph("!x. x", GraphMode::Full);
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.out(0), &[1, 1], "body edge then binding edge");
        assert_eq!(g.name(1), "VAR");
    }

    #[test]
    fn self_application_makes_self_loop() {
        let g = graph("!f. f f", GraphMode::Full);
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 3);
        let f = 1;
        assert_eq!(g.name(f), "VARFUNC");
        assert_eq!(g.out(f), &[f]);
        assert_eq!(g.degree(f), 4, "two incoming from !, one self in, one self out");
    }

    #[test]
    fn shadowed_binders_stay_separate() {
        let g = graph("!x. P x /\\ (!x. Q x)", GraphMode::Full);
        assert_eq!(g.node_count(), 7);
        let vars: Vec<_> = g.node_ids().filter(|&v| g.name(v) == "VAR").collect();
        assert_eq!(vars.len(), 2, "inner and outer x are different nodes");
        assert_eq!(g.edge_count(), 8, "six tree edges plus two binding edges");
    }

    #[test]
    fn closed_entry_point_rejects_free_variables() {
        let ast = parse_text("P x").unwrap();
        match build_graph_closed(&ast, GraphMode::Full, &|n| n == "P") {
            Err(GraphError::FreeVariable(name)) => assert_eq!(name, "x"),
            other => panic!("expected FreeVariable, got {other:?}"),
        }
        let closed = ast.close(&|n| n == "P");
        assert!(build_graph_closed(&closed, GraphMode::Full, &|n| n == "P").is_ok());
    }

    #[test]
    fn unbound_names_compile_as_constants() {
        let g = graph("P x", GraphMode::Full);
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.kind(0), NodeKind::ConstFunc);
        assert_eq!(g.kind(1), NodeKind::ConstValue);
        assert_eq!(g.name(1), "x");
    }

    #[test]
    fn full_mode_names_are_erased() {
        let g = graph("!u. ?w. P u /\\ Q u w", GraphMode::Full);
        for v in g.node_ids() {
            if g.kind(v).is_variable() {
                assert!(g.name(v) == "VAR" || g.name(v) == "VARFUNC");
            }
        }
    }

    #[test]
    fn in_edges_are_transpose_of_out_edges() {
        let g = graph("!f. ?x. f x c /\\ P f", GraphMode::Full);
        let via_out: usize = g.node_ids().map(|v| g.out_degree(v)).sum();
        let via_in: usize = g.node_ids().map(|v| g.in_degree(v)).sum();
        assert_eq!(via_out, via_in);
        for v in g.node_ids() {
            for &(src, rank) in g.incoming(v) {
                assert_eq!(g.out(src)[rank - 1], v);
            }
        }
    }
}
