//! Shuffled pair batching over loaded records, plus the content-addressed
//! graph cache (HolStep reuses statements heavily across conjectures).

use super::ConjectureRecord;
use crate::graph::{build_graph, GraphMode};
use crate::hol::Ast;
use crate::model::{PreparedGraph, Vocabulary};
use crate::rng::SplitMix64;
use std::collections::HashMap;
use std::sync::Arc;

/// One labeled pair: indices into the loaded record list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairRef {
    pub record: usize,
    pub positive: bool,
    pub index: usize,
}

impl PairRef {
    pub fn label(&self) -> usize {
        usize::from(self.positive)
    }

    pub fn statement<'a>(&self, records: &'a [ConjectureRecord]) -> &'a super::Statement {
        let record = &records[self.record];
        if self.positive {
            &record.positives[self.index]
        } else {
            &record.negatives[self.index]
        }
    }
}

/// All pairs of the records, shuffled by the epoch seed, in batches of
/// `batch_size` with the final short batch emitted.
pub fn batch_stream(
    records: &[ConjectureRecord],
    batch_size: usize,
    epoch_seed: u64,
) -> impl Iterator<Item = Vec<PairRef>> {
    assert!(batch_size > 0, "batch size must be positive");
    let mut pairs: Vec<PairRef> = Vec::new();
    for (r, record) in records.iter().enumerate() {
        for i in 0..record.positives.len() {
            pairs.push(PairRef {
                record: r,
                positive: true,
                index: i,
            });
        }
        for i in 0..record.negatives.len() {
            pairs.push(PairRef {
                record: r,
                positive: false,
                index: i,
            });
        }
    }
    let mut rng = SplitMix64::new(epoch_seed);
    rng.shuffle(&mut pairs);
    let mut at = 0;
    std::iter::from_fn(move || {
        if at >= pairs.len() {
            return None;
        }
        let end = (at + batch_size).min(pairs.len());
        let batch = pairs[at..end].to_vec();
        at = end;
        Some(batch)
    })
}

fn text_key(text: &str) -> u128 {
    let mut a: u64 = 0xcbf2_9ce4_8422_2325;
    let mut b: u64 = 0x9e37_79b9_7f4a_7c15;
    for byte in text.as_bytes() {
        a = (a ^ *byte as u64).wrapping_mul(0x0000_0100_0000_01b3);
        b = (b ^ *byte as u64).wrapping_mul(0xc2b2_ae3d_27d4_eb4f);
        b ^= b >> 29;
    }
    ((a as u128) << 64) | b as u128
}

/// Graphs keyed by the content hash of the originating text, so duplicate
/// statements across conjectures are built once. Single-writer; finished
/// graphs are shared immutably.
pub struct GraphCache {
    mode: GraphMode,
    map: HashMap<u128, Arc<PreparedGraph>>,
    builds: usize,
    hits: usize,
}

impl GraphCache {
    pub fn new(mode: GraphMode) -> GraphCache {
        GraphCache {
            mode,
            map: HashMap::new(),
            builds: 0,
            hits: 0,
        }
    }

    pub fn mode(&self) -> GraphMode {
        self.mode
    }

    /// Returns the prepared graph for (text, ast), building it on first use.
    pub fn prepared(&mut self, text: &str, ast: &Ast, vocab: &Vocabulary) -> Arc<PreparedGraph> {
        let key = text_key(text);
        if let Some(found) = self.map.get(&key) {
            self.hits += 1;
            return Arc::clone(found);
        }
        self.builds += 1;
        let graph = build_graph(ast, self.mode);
        let prepared = Arc::new(PreparedGraph::prepare(graph, vocab));
        self.map.insert(key, Arc::clone(&prepared));
        prepared
    }

    pub fn builds(&self) -> usize {
        self.builds
    }

    pub fn hits(&self) -> usize {
        self.hits
    }
}
