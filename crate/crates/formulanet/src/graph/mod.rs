//! Formula graphs: rename-invariant compilation of parse trees, treelet
//! enumeration, canonical hashing, variable renaming, DOT export and a
//! line-oriented wire format.

mod build;
mod canon;
mod dot;
mod rename;
mod treelet;
mod wire;

pub use build::{build_graph, build_graph_closed};
pub use canon::canonical_hash;
pub use dot::export_dot;
pub use rename::rename_ast_variables;
pub use treelet::{enumerate_treelets, treelet_membership_counts, Treelet};
pub use wire::{parse_graph, serialize_graph};

use std::fmt;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    ConstValue,
    ConstFunc,
    VarValue,
    VarFunc,
    Quantifier,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::ConstValue => "constant-value",
            NodeKind::ConstFunc => "constant-function",
            NodeKind::VarValue => "variable-value",
            NodeKind::VarFunc => "variable-function",
            NodeKind::Quantifier => "quantifier",
        }
    }

    pub fn from_str(s: &str) -> Option<NodeKind> {
        Some(match s {
            "constant-value" => NodeKind::ConstValue,
            "constant-function" => NodeKind::ConstFunc,
            "variable-value" => NodeKind::VarValue,
            "variable-function" => NodeKind::VarFunc,
            "quantifier" => NodeKind::Quantifier,
            _ => return None,
        })
    }

    pub fn is_variable(self) -> bool {
        matches!(self, NodeKind::VarValue | NodeKind::VarFunc)
    }

    pub fn is_constant(self) -> bool {
        matches!(self, NodeKind::ConstValue | NodeKind::ConstFunc)
    }
}

/// How far the graph construction goes. `Full` is the rename-invariant
/// graph; the other three are the ablation inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum GraphMode {
    #[default]
    Full,
    TreeOldNames,
    TreeRenamed,
    GraphOldNames,
}

impl GraphMode {
    pub const ALL: [GraphMode; 4] = [
        GraphMode::Full,
        GraphMode::TreeOldNames,
        GraphMode::TreeRenamed,
        GraphMode::GraphOldNames,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GraphMode::Full => "full",
            GraphMode::TreeOldNames => "tree-old-names",
            GraphMode::TreeRenamed => "tree-renamed",
            GraphMode::GraphOldNames => "graph-old-names",
        }
    }

    pub fn from_str(s: &str) -> Option<GraphMode> {
        Some(match s {
            "full" => GraphMode::Full,
            "tree-old-names" => GraphMode::TreeOldNames,
            "tree-renamed" => GraphMode::TreeRenamed,
            "graph-old-names" => GraphMode::GraphOldNames,
            _ => return None,
        })
    }

    /// Tree modes keep the parse tree; the other two merge nodes and add
    /// quantifier binding edges.
    pub fn is_tree(self) -> bool {
        matches!(self, GraphMode::TreeOldNames | GraphMode::TreeRenamed)
    }
}

/// Renamed-variable tokens used by `Full` and `TreeRenamed` modes.
pub const VAR_TOKEN: &str = "VAR";
pub const VARFUNC_TOKEN: &str = "VARFUNC";

/// Directed multigraph with per-source ordered outgoing edges. The position
/// of a target in `out_edges[v]` is the edge's 1-based rank minus one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaGraph {
    mode: GraphMode,
    names: Vec<String>,
    kinds: Vec<NodeKind>,
    out_edges: Vec<Vec<NodeId>>,
    /// Reverse index: for each node, (source, rank) of every incoming edge.
    in_edges: Vec<Vec<(NodeId, usize)>>,
}

impl FormulaGraph {
    pub(crate) fn from_parts(
        mode: GraphMode,
        names: Vec<String>,
        kinds: Vec<NodeKind>,
        out_edges: Vec<Vec<NodeId>>,
    ) -> FormulaGraph {
        assert_eq!(names.len(), kinds.len());
        assert_eq!(names.len(), out_edges.len());
        let mut in_edges = vec![Vec::new(); names.len()];
        for (src, outs) in out_edges.iter().enumerate() {
            for (i, &dst) in outs.iter().enumerate() {
                assert!(dst < names.len(), "edge target out of range");
                in_edges[dst].push((src, i + 1));
            }
        }
        FormulaGraph {
            mode,
            names,
            kinds,
            out_edges,
            in_edges,
        }
    }

    pub fn mode(&self) -> GraphMode {
        self.mode
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out_edges.iter().map(Vec::len).sum()
    }

    pub fn name(&self, v: NodeId) -> &str {
        &self.names[v]
    }

    pub fn kind(&self, v: NodeId) -> NodeKind {
        self.kinds[v]
    }

    pub fn out(&self, v: NodeId) -> &[NodeId] {
        &self.out_edges[v]
    }

    pub fn incoming(&self, v: NodeId) -> &[(NodeId, usize)] {
        &self.in_edges[v]
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.out_edges[v].len()
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_edges[v].len()
    }

    /// Total degree (in + out, parallel edges counted), the `d_v` of the
    /// basic update rule.
    pub fn degree(&self, v: NodeId) -> usize {
        self.in_degree(v) + self.out_degree(v)
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        0..self.names.len()
    }

    /// All edges as (src, rank, dst) in source order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, usize, NodeId)> + '_ {
        self.out_edges
            .iter()
            .enumerate()
            .flat_map(|(src, outs)| outs.iter().enumerate().map(move |(i, &dst)| (src, i + 1, dst)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    FreeVariable(String),
    MalformedWire { line: usize, reason: String },
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::FreeVariable(name) => {
                write!(f, "formula has free variable {name:?}; close it first")
            }
            GraphError::MalformedWire { line, reason } => {
                write!(f, "malformed graph text at line {line}: {reason}")
            }
        }
    }
}

impl std::error::Error for GraphError {}
