//! Line-oriented graph serialization:
//!
//! ```text
//! GRAPH <mode> <n-nodes>
//! NODE <id> <kind> <name>
//! EDGE <src> <rank> <dst>
//! ```
//!
//! Node names never contain whitespace (they come from single tokens), so
//! plain space-separated fields are unambiguous.

use super::{FormulaGraph, GraphError, GraphMode, NodeKind};
use std::fmt::Write;

pub fn serialize_graph(graph: &FormulaGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "GRAPH {} {}", graph.mode().as_str(), graph.node_count());
    for v in graph.node_ids() {
        let _ = writeln!(out, "NODE {} {} {}", v, graph.kind(v).as_str(), graph.name(v));
    }
    for (src, rank, dst) in graph.edges() {
        let _ = writeln!(out, "EDGE {src} {rank} {dst}");
    }
    out
}

pub fn parse_graph(text: &str) -> Result<FormulaGraph, GraphError> {
    let err = |line: usize, reason: &str| GraphError::MalformedWire {
        line,
        reason: reason.to_string(),
    };
    let mut lines = text.lines().enumerate();
    let (lineno, header) = lines
        .next()
        .ok_or_else(|| err(0, "empty input"))?;
    let mut head = header.split_whitespace();
    if head.next() != Some("GRAPH") {
        return Err(err(lineno + 1, "expected GRAPH header"));
    }
    let mode = head
        .next()
        .and_then(GraphMode::from_str)
        .ok_or_else(|| err(lineno + 1, "bad mode"))?;
    let n: usize = head
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| err(lineno + 1, "bad node count"))?;

    let mut names = vec![None; n];
    let mut kinds = vec![NodeKind::ConstValue; n];
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("NODE") => {
                let id: usize = fields
                    .next()
                    .and_then(|s| s.parse().ok())
                    .filter(|&id| id < n)
                    .ok_or_else(|| err(lineno + 1, "bad node id"))?;
                let kind = fields
                    .next()
                    .and_then(NodeKind::from_str)
                    .ok_or_else(|| err(lineno + 1, "bad node kind"))?;
                let name = fields
                    .next()
                    .ok_or_else(|| err(lineno + 1, "missing node name"))?;
                if names[id].is_some() {
                    return Err(err(lineno + 1, "duplicate node id"));
                }
                names[id] = Some(name.to_string());
                kinds[id] = kind;
            }
            Some("EDGE") => {
                let mut nums = [0usize; 3];
                for slot in &mut nums {
                    *slot = fields
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err(lineno + 1, "bad edge field"))?;
                }
                let [src, rank, dst] = nums;
                if src >= n || dst >= n || rank == 0 {
                    return Err(err(lineno + 1, "edge endpoint or rank out of range"));
                }
                edges.push((src, rank, dst));
            }
            _ => return Err(err(lineno + 1, "unknown record")),
        }
    }

    let names: Vec<String> = names
        .into_iter()
        .enumerate()
        .map(|(id, name)| name.ok_or_else(|| err(0, &format!("missing NODE {id}"))))
        .collect::<Result<_, _>>()?;

    let mut outs: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (src, rank, dst) in edges {
        outs[src].push((rank, dst));
    }
    let mut out_edges = Vec::with_capacity(n);
    for (src, mut ranked) in outs.into_iter().enumerate() {
        ranked.sort_unstable();
        for (i, &(rank, _)) in ranked.iter().enumerate() {
            if rank != i + 1 {
                return Err(err(
                    0,
                    &format!("ranks of node {src} are not contiguous from 1"),
                ));
            }
        }
        out_edges.push(ranked.into_iter().map(|(_, dst)| dst).collect());
    }
    Ok(FormulaGraph::from_parts(mode, names, kinds, out_edges))
}
