//! Graph embedding: initial token projections, simultaneous per-node
//! updates (neighbor messages, optionally treelet terms), max-pool readout,
//! classifier heads and the intermediate-supervision batch loss.

use super::net::{Block, Ctx, Head, Phase};
use super::{ModelConfig, ModelError, Setting, Vocabulary};
use crate::graph::{enumerate_treelets, FormulaGraph};
use crate::nn::{Matrix, NodeId, ParamId, ParamStore, Scalar, Tape};
use crate::rng::SplitMix64;

/// Per-graph constants consumed by the update rule: edge endpoints in edge
/// order, 1/d_v, treelet role indices and 1/e_v.
#[derive(Debug, Clone)]
pub struct GraphAux {
    pub edge_src: Vec<usize>,
    pub edge_dst: Vec<usize>,
    pub inv_degree: Vec<f64>,
    pub treelet_left: Vec<usize>,
    pub treelet_head: Vec<usize>,
    pub treelet_right: Vec<usize>,
    pub inv_membership: Vec<f64>,
}

impl GraphAux {
    pub fn new(graph: &FormulaGraph) -> GraphAux {
        let mut edge_src = Vec::with_capacity(graph.edge_count());
        let mut edge_dst = Vec::with_capacity(graph.edge_count());
        for (src, _, dst) in graph.edges() {
            edge_src.push(src);
            edge_dst.push(dst);
        }
        let inv_degree = graph
            .node_ids()
            .map(|v| {
                let d = graph.degree(v);
                if d == 0 {
                    0.0
                } else {
                    1.0 / d as f64
                }
            })
            .collect();

        let treelets = enumerate_treelets(graph);
        let mut membership = vec![0usize; graph.node_count()];
        for t in &treelets {
            membership[t.left] += 1;
            membership[t.head] += 1;
            membership[t.right] += 1;
        }
        let inv_membership = membership
            .iter()
            .map(|&e| if e == 0 { 0.0 } else { 1.0 / e as f64 })
            .collect();
        GraphAux {
            edge_src,
            edge_dst,
            inv_degree,
            treelet_left: treelets.iter().map(|t| t.left).collect(),
            treelet_head: treelets.iter().map(|t| t.head).collect(),
            treelet_right: treelets.iter().map(|t| t.right).collect(),
            inv_membership,
        }
    }

    pub fn treelet_count(&self) -> usize {
        self.treelet_left.len()
    }
}

/// A graph bundled with its update constants and vocabulary indices,
/// ready to embed. This is the unit the data cache stores.
#[derive(Debug, Clone)]
pub struct PreparedGraph {
    pub graph: FormulaGraph,
    pub aux: GraphAux,
    pub tokens: Vec<usize>,
}

impl PreparedGraph {
    pub fn prepare(graph: FormulaGraph, vocab: &Vocabulary) -> PreparedGraph {
        let aux = GraphAux::new(&graph);
        let tokens = graph
            .node_ids()
            .map(|v| vocab.index_of(graph.name(v)))
            .collect();
        PreparedGraph { graph, aux, tokens }
    }
}

/// Per-node embeddings after a given number of update steps.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingState<S> {
    pub step: usize,
    pub x: Matrix<S>,
}

/// Tape nodes for one embedded graph: node-embedding matrices and pooled
/// row vectors for steps 0..=T.
pub struct EmbedNodes {
    pub states: Vec<NodeId>,
    pub pooled: Vec<NodeId>,
}

/// Embedding matrices extracted from a forward pass, steps 0..=T.
#[derive(Debug, Clone)]
pub struct EmbedOutput<S> {
    pub states: Vec<Matrix<S>>,
    pub pooled: Vec<Matrix<S>>,
}

/// One conjecture/statement pair in a classification batch. `conjecture` is
/// `None` in the unconditional setting, where it is never read.
pub struct PairExample<'a> {
    pub conjecture: Option<&'a PreparedGraph>,
    pub statement: &'a PreparedGraph,
    pub label: usize,
}

/// Loss and per-step logits of one batch forward.
pub struct BatchOut {
    pub loss: NodeId,
    pub step_logits: Vec<NodeId>,
}

struct StepParams {
    fp: Block,
    fi: Block,
    fo: Block,
    /// F_L, F_H, F_R when the model is order-preserving.
    treelet: Option<[Block; 3]>,
}

/// Parameter handles for the whole network. The parameters themselves live
/// in a [`ParamStore`]; the model is a named view over them.
pub struct Model {
    pub config: ModelConfig,
    proj: ParamId,
    steps: Vec<StepParams>,
    heads: Vec<Head>,
}

impl std::fmt::Debug for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Model").field("config", &self.config).finish()
    }
}

impl Model {
    /// Creates freshly initialized parameters for `config` in `store`.
    pub fn init<S: Scalar>(
        config: ModelConfig,
        store: &mut ParamStore<S>,
        seed: u64,
    ) -> Result<Model, ModelError> {
        config.validate()?;
        let mut rng = SplitMix64::new(seed);
        let d = config.dim;
        let h = config.update_hidden;
        let limit = (6.0 / (config.vocab_size + d) as f64).sqrt();
        let mut proj_matrix = Matrix::zeros(config.vocab_size, d);
        for v in proj_matrix.values_mut() {
            *v = S::from_f64(rng.next_range_f64(-limit, limit));
        }
        let proj = store.add("proj", proj_matrix, true);

        let mut steps = Vec::with_capacity(config.steps);
        for t in 0..config.steps {
            let fp = Block::create(store, &mut rng, &format!("s{t}.fp"), d, h, d);
            let fi = Block::create(store, &mut rng, &format!("s{t}.fi"), 2 * d, h, d);
            let fo = Block::create(store, &mut rng, &format!("s{t}.fo"), 2 * d, h, d);
            let treelet = if config.order_preserving {
                Some([
                    Block::create(store, &mut rng, &format!("s{t}.fl"), 3 * d, h, d),
                    Block::create(store, &mut rng, &format!("s{t}.fh"), 3 * d, h, d),
                    Block::create(store, &mut rng, &format!("s{t}.fr"), 3 * d, h, d),
                ])
            } else {
                None
            };
            steps.push(StepParams { fp, fi, fo, treelet });
        }

        let mut heads = Vec::with_capacity(config.steps + 1);
        for t in 0..=config.steps {
            heads.push(Head::create(
                store,
                &mut rng,
                &format!("h{t}"),
                config.head_input(),
                config.classifier_hidden,
            ));
        }
        Ok(Model {
            config,
            proj,
            steps,
            heads,
        })
    }

    /// Binds to parameters already present in `store` (checkpoint load).
    pub fn lookup<S: Scalar>(
        config: ModelConfig,
        store: &ParamStore<S>,
    ) -> Result<Model, ModelError> {
        config.validate()?;
        let proj = store
            .id("proj")
            .ok_or_else(|| ModelError::BadConfig("missing parameter proj".to_string()))?;
        if store.value(proj).shape() != (config.vocab_size, config.dim) {
            return Err(ModelError::VocabMismatch {
                expected: config.vocab_size,
                got: store.value(proj).rows(),
            });
        }
        let mut steps = Vec::with_capacity(config.steps);
        for t in 0..config.steps {
            let fp = Block::lookup(store, &format!("s{t}.fp"))?;
            let fi = Block::lookup(store, &format!("s{t}.fi"))?;
            let fo = Block::lookup(store, &format!("s{t}.fo"))?;
            let treelet = if config.order_preserving {
                Some([
                    Block::lookup(store, &format!("s{t}.fl"))?,
                    Block::lookup(store, &format!("s{t}.fh"))?,
                    Block::lookup(store, &format!("s{t}.fr"))?,
                ])
            } else {
                None
            };
            steps.push(StepParams { fp, fi, fo, treelet });
        }
        let mut heads = Vec::with_capacity(config.steps + 1);
        for t in 0..=config.steps {
            heads.push(Head::lookup(store, &format!("h{t}"))?);
        }
        Ok(Model {
            config,
            proj,
            steps,
            heads,
        })
    }

    /// x_v^0: one row of the token projection per node; all VAR nodes share
    /// one row, all VARFUNC nodes another, unseen names share UNKNOWN.
    fn initial_on_tape<S: Scalar>(
        &self,
        ctx: &mut Ctx<S>,
        g: &PreparedGraph,
    ) -> Result<NodeId, ModelError> {
        let proj = ctx.leaf(self.proj);
        Ok(ctx.tape.gather_rows(proj, &g.tokens)?)
    }

    /// One simultaneous update of every node embedding: reads only x^t and
    /// produces x^{t+1}.
    fn step_on_tape<S: Scalar>(
        &self,
        ctx: &mut Ctx<S>,
        g: &PreparedGraph,
        x: NodeId,
        t: usize,
        order: bool,
    ) -> Result<NodeId, ModelError> {
        let sp = &self.steps[t];
        let n = g.graph.node_count();
        let mut bracket: Option<NodeId> = None;

        if !g.aux.edge_src.is_empty() {
            let src_rows = ctx.tape.gather_rows(x, &g.aux.edge_src)?;
            let dst_rows = ctx.tape.gather_rows(x, &g.aux.edge_dst)?;
            // Both update functions read (source, destination); incoming
            // messages accumulate at the destination, outgoing at the source.
            let edge_in = ctx.tape.concat_cols(&[src_rows, dst_rows])?;
            let fi_msgs = sp.fi.forward(ctx, edge_in)?;
            let fi_sum = ctx.tape.scatter_add_rows(fi_msgs, &g.aux.edge_dst, n)?;
            let fo_msgs = sp.fo.forward(ctx, edge_in)?;
            let fo_sum = ctx.tape.scatter_add_rows(fo_msgs, &g.aux.edge_src, n)?;
            let msg = ctx.tape.add(fi_sum, fo_sum)?;
            let scale: Vec<S> = g.aux.inv_degree.iter().map(|&v| S::from_f64(v)).collect();
            bracket = Some(ctx.tape.scale_rows(msg, &scale)?);
        }

        if order && g.aux.treelet_count() > 0 {
            let blocks = sp.treelet.as_ref().ok_or_else(|| {
                ModelError::BadConfig("model has no treelet update functions".to_string())
            })?;
            let l_rows = ctx.tape.gather_rows(x, &g.aux.treelet_left)?;
            let h_rows = ctx.tape.gather_rows(x, &g.aux.treelet_head)?;
            let r_rows = ctx.tape.gather_rows(x, &g.aux.treelet_right)?;
            // All three functions read (left, head, right); each scatters to
            // the node playing that role.
            let tre_in = ctx.tape.concat_cols(&[l_rows, h_rows, r_rows])?;
            let fl = blocks[0].forward(ctx, tre_in)?;
            let fl_sum = ctx.tape.scatter_add_rows(fl, &g.aux.treelet_left, n)?;
            let fh = blocks[1].forward(ctx, tre_in)?;
            let fh_sum = ctx.tape.scatter_add_rows(fh, &g.aux.treelet_head, n)?;
            let fr = blocks[2].forward(ctx, tre_in)?;
            let fr_sum = ctx.tape.scatter_add_rows(fr, &g.aux.treelet_right, n)?;
            let sum = ctx.tape.add(fl_sum, fh_sum)?;
            let sum = ctx.tape.add(sum, fr_sum)?;
            let scale: Vec<S> = g
                .aux
                .inv_membership
                .iter()
                .map(|&v| S::from_f64(v))
                .collect();
            let scaled = ctx.tape.scale_rows(sum, &scale)?;
            bracket = Some(match bracket {
                Some(b) => ctx.tape.add(b, scaled)?,
                None => scaled,
            });
        }

        let pre = match bracket {
            Some(b) => ctx.tape.add(x, b)?,
            None => x,
        };
        sp.fp.forward(ctx, pre)
    }

    /// Embeds a graph on the caller's tape, returning per-step node matrices
    /// and pooled vectors for steps 0..=T.
    pub fn embed_on_tape<S: Scalar>(
        &self,
        ctx: &mut Ctx<S>,
        g: &PreparedGraph,
    ) -> Result<EmbedNodes, ModelError> {
        let mut x = self.initial_on_tape(ctx, g)?;
        let mut states = vec![x];
        let mut pooled = vec![ctx.tape.max_pool_rows(x)?];
        for t in 0..self.config.steps {
            x = self.step_on_tape(ctx, g, x, t, self.config.order_preserving)?;
            states.push(x);
            pooled.push(ctx.tape.max_pool_rows(x)?);
        }
        Ok(EmbedNodes { states, pooled })
    }

    /// Convenience forward without gradient bookkeeping.
    pub fn embed_graph<S: Scalar>(
        &self,
        store: &mut ParamStore<S>,
        g: &PreparedGraph,
    ) -> Result<EmbedOutput<S>, ModelError> {
        let mut tape = Tape::new();
        let mut ctx = Ctx::new(&mut tape, store, Phase::Eval, false);
        let nodes = self.embed_on_tape(&mut ctx, g)?;
        Ok(EmbedOutput {
            states: nodes.states.iter().map(|&id| tape.value(id).clone()).collect(),
            pooled: nodes.pooled.iter().map(|&id| tape.value(id).clone()).collect(),
        })
    }

    pub fn initial_embeddings<S: Scalar>(
        &self,
        store: &mut ParamStore<S>,
        g: &PreparedGraph,
    ) -> Result<EmbeddingState<S>, ModelError> {
        let mut tape = Tape::new();
        let mut ctx = Ctx::new(&mut tape, store, Phase::Eval, false);
        let x0 = self.initial_on_tape(&mut ctx, g)?;
        Ok(EmbeddingState {
            step: 0,
            x: tape.value(x0).clone(),
        })
    }

    /// One basic update (Eqn-1 terms only), regardless of whether the model
    /// also has treelet functions.
    pub fn update_step_basic<S: Scalar>(
        &self,
        store: &mut ParamStore<S>,
        g: &PreparedGraph,
        state: &EmbeddingState<S>,
    ) -> Result<EmbeddingState<S>, ModelError> {
        self.update_step_inner(store, g, state, false)
    }

    /// One order-preserving update (basic terms plus treelet terms).
    pub fn update_step_order<S: Scalar>(
        &self,
        store: &mut ParamStore<S>,
        g: &PreparedGraph,
        state: &EmbeddingState<S>,
    ) -> Result<EmbeddingState<S>, ModelError> {
        self.update_step_inner(store, g, state, true)
    }

    fn update_step_inner<S: Scalar>(
        &self,
        store: &mut ParamStore<S>,
        g: &PreparedGraph,
        state: &EmbeddingState<S>,
        order: bool,
    ) -> Result<EmbeddingState<S>, ModelError> {
        if state.step >= self.config.steps {
            return Err(ModelError::StepExhausted {
                step: state.step,
                total: self.config.steps,
            });
        }
        let mut tape = Tape::new();
        let mut ctx = Ctx::new(&mut tape, store, Phase::Eval, false);
        let x = ctx.tape.constant(state.x.clone());
        let next = self.step_on_tape(&mut ctx, g, x, state.step, order)?;
        Ok(EmbeddingState {
            step: state.step + 1,
            x: tape.value(next).clone(),
        })
    }

    /// Classifier logits for one pooled statement embedding (and conjecture
    /// embedding in the conditional setting) at step head `t`.
    pub fn classify_on_tape<S: Scalar>(
        &self,
        ctx: &mut Ctx<S>,
        conjecture: Option<NodeId>,
        statement: NodeId,
        t: usize,
    ) -> Result<NodeId, ModelError> {
        let head = self.heads.get(t).ok_or(ModelError::StepExhausted {
            step: t,
            total: self.config.steps,
        })?;
        let input = match self.config.setting {
            Setting::Conditional => {
                let conj = conjecture.ok_or(ModelError::MissingConjecture)?;
                ctx.tape.concat_cols(&[conj, statement])?
            }
            Setting::Unconditional => statement,
        };
        head.forward(ctx, input)
    }

    /// Batch forward: embeds every pair, runs each step's classifier head on
    /// the pooled embeddings, and sums the per-step cross-entropy losses.
    pub fn batch_forward<S: Scalar>(
        &self,
        ctx: &mut Ctx<S>,
        pairs: &[PairExample<'_>],
    ) -> Result<BatchOut, ModelError> {
        if pairs.is_empty() {
            return Err(ModelError::Nn(crate::nn::NnError::EmptyInput {
                op: "batch_forward",
            }));
        }
        let conditional = self.config.setting == Setting::Conditional;
        let mut stmt_pooled: Vec<EmbedNodes> = Vec::with_capacity(pairs.len());
        let mut conj_pooled: Vec<EmbedNodes> = Vec::with_capacity(pairs.len());
        for pair in pairs {
            if conditional {
                let conj = pair.conjecture.ok_or(ModelError::MissingConjecture)?;
                conj_pooled.push(self.embed_on_tape(ctx, conj)?);
            }
            stmt_pooled.push(self.embed_on_tape(ctx, pair.statement)?);
        }
        let labels: Vec<usize> = pairs.iter().map(|p| p.label).collect();

        let mut step_logits = Vec::with_capacity(self.config.steps + 1);
        let mut loss: Option<NodeId> = None;
        for t in 0..=self.config.steps {
            let stmt_ids: Vec<NodeId> = stmt_pooled.iter().map(|e| e.pooled[t]).collect();
            let stmt_rows = ctx.tape.concat_rows(&stmt_ids)?;
            let input = if conditional {
                let conj_ids: Vec<NodeId> = conj_pooled.iter().map(|e| e.pooled[t]).collect();
                let conj_rows = ctx.tape.concat_rows(&conj_ids)?;
                ctx.tape.concat_cols(&[conj_rows, stmt_rows])?
            } else {
                stmt_rows
            };
            let logits = self.heads[t].forward(ctx, input)?;
            step_logits.push(logits);
            let step_loss = ctx.tape.softmax_cross_entropy(logits, &labels)?;
            loss = Some(match loss {
                Some(acc) => ctx.tape.add(acc, step_loss)?,
                None => step_loss,
            });
        }
        Ok(BatchOut {
            loss: loss.expect("at least the step-0 head exists"),
            step_logits,
        })
    }
}
