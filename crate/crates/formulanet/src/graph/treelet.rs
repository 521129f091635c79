//! Treelets: ordered triples (left child, head, right child) drawn from two
//! rank-ordered outgoing edges of one node. These are what make the
//! order-preserving update sensitive to argument order.

use super::{FormulaGraph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Treelet {
    pub left: NodeId,
    pub head: NodeId,
    pub right: NodeId,
    /// 1-based rank of the edge (head, left).
    pub left_rank: usize,
    /// 1-based rank of the edge (head, right); always > left_rank.
    pub right_rank: usize,
}

/// One treelet per unordered pair of distinct out-edge positions of each
/// node, so a node of out-degree k heads C(k, 2) treelets. Parallel edges
/// count by position: f(x,x) yields the treelet (x, f, x).
pub fn enumerate_treelets(graph: &FormulaGraph) -> Vec<Treelet> {
    let mut treelets = Vec::new();
    for head in graph.node_ids() {
        let outs = graph.out(head);
        for i in 0..outs.len() {
            for j in (i + 1)..outs.len() {
                treelets.push(Treelet {
                    left: outs[i],
                    head,
                    right: outs[j],
                    left_rank: i + 1,
                    right_rank: j + 1,
                });
            }
        }
    }
    treelets
}

/// Per-node treelet membership count e_v: the number of (treelet, role)
/// incidences with v as left child, head, or right child. Summing e_v over
/// all nodes gives exactly 3x the treelet count, also when a degenerate
/// treelet contains the same node twice.
pub fn treelet_membership_counts(graph: &FormulaGraph) -> Vec<usize> {
    let mut counts = vec![0usize; graph.node_count()];
    for t in enumerate_treelets(graph) {
        counts[t.left] += 1;
        counts[t.head] += 1;
        counts[t.right] += 1;
    }
    counts
}
