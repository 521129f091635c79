//! Canonical hashing by iterative label refinement.
//!
//! Node labels start from (kind, name) and are refined for `|V|` rounds
//! (always at least the graph diameter) by absorbing rank-ordered out-edge
//! labels and the sorted multiset of in-edge labels. The digest is a hash of
//! the sorted final labels plus the sorted multiset of labeled edges, so it
//! is identical for graphs related by any node-id permutation that preserves
//! names, structure, and edge ranks.

use super::FormulaGraph;

/// Two independent 64-bit lanes, combined into a 128-bit hex digest.
type Label = (u64, u64);

const SEED_A: u64 = 0x9e37_79b9_7f4a_7c15;
const SEED_B: u64 = 0xc2b2_ae3d_27d4_eb4f;

fn fin(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn mix(h: Label, x: Label) -> Label {
    (
        fin(h.0 ^ x.0.wrapping_mul(SEED_A).wrapping_add(0x1656_667b)),
        fin(h.1 ^ x.1.wrapping_mul(SEED_B).wrapping_add(0x27d4_eb2f)),
    )
}

fn hash_str(s: &str) -> Label {
    let mut h = (SEED_A, SEED_B);
    for b in s.as_bytes() {
        h = mix(h, (*b as u64, (*b as u64) << 8));
    }
    mix(h, (s.len() as u64, s.len() as u64))
}

pub fn canonical_hash(graph: &FormulaGraph) -> String {
    let n = graph.node_count();
    let mut labels: Vec<Label> = graph
        .node_ids()
        .map(|v| mix(hash_str(graph.name(v)), hash_str(graph.kind(v).as_str())))
        .collect();

    let rounds = n.max(1);
    let mut next = labels.clone();
    for _ in 0..rounds {
        for v in graph.node_ids() {
            let mut h = mix((0x51_7c, 0x2a_55), labels[v]);
            // Outgoing edges in rank order: the order is semantic.
            for (i, &w) in graph.out(v).iter().enumerate() {
                h = mix(h, (i as u64 + 1, i as u64 + 1));
                h = mix(h, labels[w]);
            }
            // Incoming edges as a sorted multiset of (source label, rank).
            let mut ins: Vec<(Label, usize)> = graph
                .incoming(v)
                .iter()
                .map(|&(u, rank)| (labels[u], rank))
                .collect();
            ins.sort_unstable();
            for (lab, rank) in ins {
                h = mix(h, (rank as u64, rank as u64));
                h = mix(h, lab);
            }
            next[v] = h;
        }
        std::mem::swap(&mut labels, &mut next);
    }

    // Sorted serialization of final labels and labeled edges.
    let mut sorted = labels.clone();
    sorted.sort_unstable();
    let mut digest = mix(hash_str(graph.mode().as_str()), (n as u64, graph.edge_count() as u64));
    for lab in &sorted {
        digest = mix(digest, *lab);
    }
    let mut edges: Vec<(Label, u64, Label)> = graph
        .edges()
        .map(|(s, r, d)| (labels[s], r as u64, labels[d]))
        .collect();
    edges.sort_unstable();
    for (s, r, d) in edges {
        digest = mix(digest, s);
        digest = mix(digest, (r, r));
        digest = mix(digest, d);
    }
    format!("{:016x}{:016x}", digest.0, digest.1)
}
