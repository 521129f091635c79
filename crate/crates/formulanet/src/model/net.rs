//! Building blocks shared by the update functions and classifier heads:
//! parameter creation/lookup and tape forwards for the
//! [affine -> batchnorm -> relu] layers.

use crate::nn::{
    update_running_stats, BnStats, Matrix, NodeId, ParamId, ParamStore, Scalar, Tape,
};
use crate::rng::SplitMix64;
use std::collections::HashMap;

use super::ModelError;

/// Training uses batch statistics in the classifier heads and folds them
/// into running averages; evaluation uses the stored running statistics.
/// Batch normalization inside the update functions always uses the
/// statistics of the current graph, in both phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Train,
    Eval,
}

/// Everything a forward pass needs: the tape, the parameter store (mutable
/// for running-statistic updates), a leaf cache so each parameter is bound
/// to the tape exactly once, and the phase flags.
pub struct Ctx<'a, S: Scalar> {
    pub tape: &'a mut Tape<S>,
    pub store: &'a mut ParamStore<S>,
    pub phase: Phase,
    /// Fold batch statistics into running averages (training only; switched
    /// off for gradient checks so forwards are side-effect free).
    pub update_running: bool,
    leaves: HashMap<ParamId, NodeId>,
}

impl<'a, S: Scalar> Ctx<'a, S> {
    pub fn new(
        tape: &'a mut Tape<S>,
        store: &'a mut ParamStore<S>,
        phase: Phase,
        update_running: bool,
    ) -> Ctx<'a, S> {
        Ctx {
            tape,
            store,
            phase,
            update_running,
            leaves: HashMap::new(),
        }
    }

    /// Binds a parameter to the tape once, reusing the leaf on later calls.
    pub fn leaf(&mut self, id: ParamId) -> NodeId {
        if let Some(&node) = self.leaves.get(&id) {
            return node;
        }
        let value = self.store.value(id).clone();
        let node = if self.store.is_trainable(id) {
            self.tape.param(id, value)
        } else {
            self.tape.constant(value)
        };
        self.leaves.insert(id, node);
        node
    }
}

/// One batch-normalization layer: trainable scale/shift plus running stats.
#[derive(Debug, Clone, Copy)]
pub struct BnLayer {
    pub gamma: ParamId,
    pub beta: ParamId,
    pub mean: ParamId,
    pub var: ParamId,
}

impl BnLayer {
    fn create<S: Scalar>(store: &mut ParamStore<S>, prefix: &str, width: usize) -> BnLayer {
        BnLayer {
            gamma: store.add(&format!("{prefix}.gamma"), Matrix::filled(1, width, S::ONE), true),
            beta: store.add(&format!("{prefix}.beta"), Matrix::zeros(1, width), true),
            mean: store.add(&format!("{prefix}.mean"), Matrix::zeros(1, width), false),
            var: store.add(&format!("{prefix}.var"), Matrix::filled(1, width, S::ONE), false),
        }
    }

    fn lookup<S: Scalar>(store: &ParamStore<S>, prefix: &str) -> Result<BnLayer, ModelError> {
        let get = |suffix: &str| {
            store
                .id(&format!("{prefix}.{suffix}"))
                .ok_or_else(|| ModelError::BadConfig(format!("missing parameter {prefix}.{suffix}")))
        };
        Ok(BnLayer {
            gamma: get("gamma")?,
            beta: get("beta")?,
            mean: get("mean")?,
            var: get("var")?,
        })
    }

    /// Intra-graph normalization: batch statistics in every phase, single
    /// rows allowed (tiny graphs produce one-row message batches).
    fn forward_intra<S: Scalar>(&self, ctx: &mut Ctx<S>, x: NodeId) -> Result<NodeId, ModelError> {
        let gamma = ctx.leaf(self.gamma);
        let beta = ctx.leaf(self.beta);
        let (y, stats) = ctx
            .tape
            .batch_norm(x, gamma, beta, BnStats::Batch { lenient: true })?;
        if ctx.update_running {
            if let Some(batch) = stats {
                let mean_id = self.mean;
                let var_id = self.var;
                let mut mean = ctx.store.value(mean_id).clone();
                let mut var = ctx.store.value(var_id).clone();
                update_running_stats(&mut mean, &mut var, &batch);
                *ctx.store.value_mut(mean_id) = mean;
                *ctx.store.value_mut(var_id) = var;
            }
        }
        Ok(y)
    }

    /// Cross-graph normalization (classifier heads): batch statistics while
    /// training, running statistics at evaluation.
    fn forward_cross<S: Scalar>(&self, ctx: &mut Ctx<S>, x: NodeId) -> Result<NodeId, ModelError> {
        match ctx.phase {
            Phase::Train => {
                let gamma = ctx.leaf(self.gamma);
                let beta = ctx.leaf(self.beta);
                let (y, stats) = ctx
                    .tape
                    .batch_norm(x, gamma, beta, BnStats::Batch { lenient: false })?;
                if ctx.update_running {
                    if let Some(batch) = stats {
                        let mut mean = ctx.store.value(self.mean).clone();
                        let mut var = ctx.store.value(self.var).clone();
                        update_running_stats(&mut mean, &mut var, &batch);
                        *ctx.store.value_mut(self.mean) = mean;
                        *ctx.store.value_mut(self.var) = var;
                    }
                }
                Ok(y)
            }
            Phase::Eval => {
                let mean = ctx.store.value(self.mean).row(0).to_vec();
                let var = ctx.store.value(self.var).row(0).to_vec();
                let gamma = ctx.leaf(self.gamma);
                let beta = ctx.leaf(self.beta);
                let (y, _) = ctx
                    .tape
                    .batch_norm(x, gamma, beta, BnStats::Running { mean, var })?;
                Ok(y)
            }
        }
    }
}

/// A two-layer update function: concatenated inputs through
/// [affine -> BN -> ReLU] twice.
#[derive(Debug, Clone, Copy)]
pub struct Block {
    pub w1: ParamId,
    pub b1: ParamId,
    pub bn1: BnLayer,
    pub w2: ParamId,
    pub b2: ParamId,
    pub bn2: BnLayer,
}

fn glorot<S: Scalar>(rng: &mut SplitMix64, rows: usize, cols: usize) -> Matrix<S> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let mut m = Matrix::zeros(rows, cols);
    for v in m.values_mut() {
        *v = S::from_f64(rng.next_range_f64(-limit, limit));
    }
    m
}

impl Block {
    pub fn create<S: Scalar>(
        store: &mut ParamStore<S>,
        rng: &mut SplitMix64,
        prefix: &str,
        input: usize,
        hidden: usize,
        output: usize,
    ) -> Block {
        Block {
            w1: store.add(&format!("{prefix}.w1"), glorot(rng, input, hidden), true),
            b1: store.add(&format!("{prefix}.b1"), Matrix::zeros(1, hidden), true),
            bn1: BnLayer::create(store, &format!("{prefix}.bn1"), hidden),
            w2: store.add(&format!("{prefix}.w2"), glorot(rng, hidden, output), true),
            b2: store.add(&format!("{prefix}.b2"), Matrix::zeros(1, output), true),
            bn2: BnLayer::create(store, &format!("{prefix}.bn2"), output),
        }
    }

    pub fn lookup<S: Scalar>(store: &ParamStore<S>, prefix: &str) -> Result<Block, ModelError> {
        let get = |suffix: &str| {
            store
                .id(&format!("{prefix}.{suffix}"))
                .ok_or_else(|| ModelError::BadConfig(format!("missing parameter {prefix}.{suffix}")))
        };
        Ok(Block {
            w1: get("w1")?,
            b1: get("b1")?,
            bn1: BnLayer::lookup(store, &format!("{prefix}.bn1"))?,
            w2: get("w2")?,
            b2: get("b2")?,
            bn2: BnLayer::lookup(store, &format!("{prefix}.bn2"))?,
        })
    }

    /// Forward with intra-graph batch statistics.
    pub fn forward<S: Scalar>(&self, ctx: &mut Ctx<S>, x: NodeId) -> Result<NodeId, ModelError> {
        let w1 = ctx.leaf(self.w1);
        let b1 = ctx.leaf(self.b1);
        let h = ctx.tape.affine(x, w1, b1)?;
        let h = self.bn1.forward_intra(ctx, h)?;
        let h = ctx.tape.relu(h);
        let w2 = ctx.leaf(self.w2);
        let b2 = ctx.leaf(self.b2);
        let out = ctx.tape.affine(h, w2, b2)?;
        let out = self.bn2.forward_intra(ctx, out)?;
        Ok(ctx.tape.relu(out))
    }
}

/// Classifier head: affine -> BN -> ReLU -> affine to 2 logits.
#[derive(Debug, Clone, Copy)]
pub struct Head {
    pub w1: ParamId,
    pub b1: ParamId,
    pub bn: BnLayer,
    pub w2: ParamId,
    pub b2: ParamId,
}

impl Head {
    pub fn create<S: Scalar>(
        store: &mut ParamStore<S>,
        rng: &mut SplitMix64,
        prefix: &str,
        input: usize,
        hidden: usize,
    ) -> Head {
        Head {
            w1: store.add(&format!("{prefix}.w1"), glorot(rng, input, hidden), true),
            b1: store.add(&format!("{prefix}.b1"), Matrix::zeros(1, hidden), true),
            bn: BnLayer::create(store, &format!("{prefix}.bn"), hidden),
            w2: store.add(&format!("{prefix}.w2"), glorot(rng, hidden, 2), true),
            b2: store.add(&format!("{prefix}.b2"), Matrix::zeros(1, 2), true),
        }
    }

    pub fn lookup<S: Scalar>(store: &ParamStore<S>, prefix: &str) -> Result<Head, ModelError> {
        let get = |suffix: &str| {
            store
                .id(&format!("{prefix}.{suffix}"))
                .ok_or_else(|| ModelError::BadConfig(format!("missing parameter {prefix}.{suffix}")))
        };
        Ok(Head {
            w1: get("w1")?,
            b1: get("b1")?,
            bn: BnLayer::lookup(store, &format!("{prefix}.bn"))?,
            w2: get("w2")?,
            b2: get("b2")?,
        })
    }

    pub fn forward<S: Scalar>(&self, ctx: &mut Ctx<S>, x: NodeId) -> Result<NodeId, ModelError> {
        let w1 = ctx.leaf(self.w1);
        let b1 = ctx.leaf(self.b1);
        let h = ctx.tape.affine(x, w1, b1)?;
        let h = self.bn.forward_cross(ctx, h)?;
        let h = ctx.tape.relu(h);
        let w2 = ctx.leaf(self.w2);
        let b2 = ctx.leaf(self.b2);
        Ok(ctx.tape.affine(h, w2, b2)?)
    }
}
