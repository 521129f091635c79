//! Reverse-mode autodiff over a recorded tape of matrix operations.
//!
//! Nodes are appended in topological order during the forward pass; backward
//! walks the tape once in reverse, accumulating gradients per node and
//! collecting them for parameter leaves. A tape can be replayed (the cached
//! forward values are deterministic) but backward may run only once.

use super::{Matrix, NnError, ParamId, Scalar};
use std::collections::HashMap;

pub const BN_EPSILON: f64 = 1e-5;

pub type NodeId = usize;

/// Statistic source for batch normalization.
pub enum BnStats<S> {
    /// Normalize by the batch's own column mean/variance. `lenient` permits
    /// single-row batches, where statistics are degenerate and the layer
    /// falls back to scale-shift only (`gamma * x + beta`); the intra-graph
    /// layers need this on tiny graphs. The strict form errors instead.
    Batch { lenient: bool },
    /// Normalize by stored running statistics (inference across graphs).
    Running { mean: Vec<S>, var: Vec<S> },
}

/// Column statistics computed by a batch-stats normalization, handed back to
/// the caller so it can fold them into running statistics.
#[derive(Debug, Clone)]
pub struct BnBatchStats<S> {
    pub mean: Vec<S>,
    /// Biased (1/n) variance, as used for normalization.
    pub var: Vec<S>,
    pub rows: usize,
}

enum Op<S> {
    Leaf {
        param: Option<ParamId>,
    },
    Affine {
        x: NodeId,
        w: NodeId,
        b: NodeId,
    },
    Relu {
        x: NodeId,
    },
    BatchNorm {
        x: NodeId,
        gamma: NodeId,
        beta: NodeId,
        x_hat: Matrix<S>,
        inv_std: Vec<S>,
        batch_coupled: bool,
    },
    MaxPoolRows {
        x: NodeId,
        argmax: Vec<usize>,
    },
    GatherRows {
        x: NodeId,
        idx: Vec<usize>,
    },
    ScatterAddRows {
        x: NodeId,
        target: Vec<usize>,
    },
    ConcatCols {
        parts: Vec<NodeId>,
    },
    ConcatRows {
        parts: Vec<NodeId>,
    },
    ScaleRows {
        x: NodeId,
        scale: Vec<S>,
    },
    Add {
        a: NodeId,
        b: NodeId,
    },
    SoftmaxXent {
        logits: NodeId,
        labels: Vec<usize>,
        probs: Matrix<S>,
    },
}

struct Node<S> {
    value: Matrix<S>,
    op: Op<S>,
    needs_grad: bool,
}

pub struct Tape<S: Scalar> {
    nodes: Vec<Node<S>>,
    consumed: bool,
}

/// Gradients keyed by parameter id after a backward pass.
#[derive(Debug)]
pub struct Gradients<S> {
    by_param: HashMap<ParamId, Matrix<S>>,
}

impl<S: Scalar> Gradients<S> {
    pub fn get(&self, id: ParamId) -> Option<&Matrix<S>> {
        self.by_param.get(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &Matrix<S>)> {
        self.by_param.iter().map(|(&id, m)| (id, m))
    }
}

impl<S: Scalar> Default for Tape<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> Tape<S> {
    pub fn new() -> Tape<S> {
        Tape {
            nodes: Vec::new(),
            consumed: false,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &Matrix<S> {
        &self.nodes[id].value
    }

    fn push(&mut self, value: Matrix<S>, op: Op<S>, needs_grad: bool) -> NodeId {
        debug_assert!(value.all_finite(), "non-finite forward value");
        self.nodes.push(Node {
            value,
            op,
            needs_grad,
        });
        self.nodes.len() - 1
    }

    /// A constant input; no gradient flows into it.
    pub fn constant(&mut self, value: Matrix<S>) -> NodeId {
        self.push(value, Op::Leaf { param: None }, false)
    }

    /// A differentiable leaf whose gradient is reported under `id`.
    pub fn param(&mut self, id: ParamId, value: Matrix<S>) -> NodeId {
        self.push(value, Op::Leaf { param: Some(id) }, true)
    }

    fn any_needs_grad(&self, ids: &[NodeId]) -> bool {
        ids.iter().any(|&i| self.nodes[i].needs_grad)
    }

    /// `y = x W + b`, bias broadcast per row. `b` is 1 x d_out.
    pub fn affine(&mut self, x: NodeId, w: NodeId, b: NodeId) -> Result<NodeId, NnError> {
        let xv = &self.nodes[x].value;
        let wv = &self.nodes[w].value;
        let bv = &self.nodes[b].value;
        if bv.rows() != 1 || bv.cols() != wv.cols() {
            return Err(NnError::ShapeMismatch {
                op: "affine",
                detail: format!("bias {:?} vs weight {:?}", bv.shape(), wv.shape()),
            });
        }
        let mut y = xv.matmul(wv)?;
        for r in 0..y.rows() {
            let row = y.row_mut(r);
            for (o, &bias) in row.iter_mut().zip(bv.row(0)) {
                *o += bias;
            }
        }
        let needs = self.any_needs_grad(&[x, w, b]);
        Ok(self.push(y, Op::Affine { x, w, b }, needs))
    }

    /// Elementwise max(0, x); subgradient at 0 is 0.
    pub fn relu(&mut self, x: NodeId) -> NodeId {
        let y = self.nodes[x].value.map(|v| if v > S::ZERO { v } else { S::ZERO });
        let needs = self.nodes[x].needs_grad;
        self.push(y, Op::Relu { x }, needs)
    }

    /// Batch normalization over rows with scale `gamma` and shift `beta`
    /// (both 1 x d). Returns the node plus, in batch-stats mode, the batch
    /// statistics for running-average updates.
    pub fn batch_norm(
        &mut self,
        x: NodeId,
        gamma: NodeId,
        beta: NodeId,
        stats: BnStats<S>,
    ) -> Result<(NodeId, Option<BnBatchStats<S>>), NnError> {
        let xv = &self.nodes[x].value;
        let (n, d) = xv.shape();
        let gv = &self.nodes[gamma].value;
        let bv = &self.nodes[beta].value;
        if gv.shape() != (1, d) || bv.shape() != (1, d) {
            return Err(NnError::ShapeMismatch {
                op: "batch_norm",
                detail: format!("gamma {:?} beta {:?} for input {:?}", gv.shape(), bv.shape(), xv.shape()),
            });
        }
        if n == 0 {
            return Err(NnError::EmptyInput { op: "batch_norm" });
        }
        let eps = S::from_f64(BN_EPSILON);

        let (mean, var, batch_coupled, emitted) = match stats {
            BnStats::Batch { lenient } => {
                if n < 2 {
                    if !lenient {
                        return Err(NnError::BatchTooSmall { rows: n });
                    }
                    // Degenerate batch: no statistics, scale-shift only.
                    let gamma_row = self.nodes[gamma].value.row(0).to_vec();
                    let beta_row = self.nodes[beta].value.row(0).to_vec();
                    let x_hat = xv.clone();
                    let mut y = Matrix::zeros(n, d);
                    for r in 0..n {
                        let src = x_hat.row(r);
                        let dst = y.row_mut(r);
                        for j in 0..d {
                            dst[j] = gamma_row[j] * src[j] + beta_row[j];
                        }
                    }
                    let needs = self.any_needs_grad(&[x, gamma, beta]);
                    let id = self.push(
                        y,
                        Op::BatchNorm {
                            x,
                            gamma,
                            beta,
                            x_hat,
                            inv_std: vec![S::ONE; d],
                            batch_coupled: false,
                        },
                        needs,
                    );
                    return Ok((id, None));
                }
                let inv_n = S::ONE / S::from_f64(n as f64);
                let mut mean = vec![S::ZERO; d];
                for r in 0..n {
                    for (m, &v) in mean.iter_mut().zip(xv.row(r)) {
                        *m += v;
                    }
                }
                for m in &mut mean {
                    *m *= inv_n;
                }
                let mut var = vec![S::ZERO; d];
                for r in 0..n {
                    for ((vv, &v), &m) in var.iter_mut().zip(xv.row(r)).zip(&mean) {
                        let c = v - m;
                        *vv += c * c;
                    }
                }
                for v in &mut var {
                    *v *= inv_n;
                }
                let emitted = BnBatchStats {
                    mean: mean.clone(),
                    var: var.clone(),
                    rows: n,
                };
                (mean, var, true, Some(emitted))
            }
            BnStats::Running { mean, var } => {
                if mean.len() != d || var.len() != d {
                    return Err(NnError::ShapeMismatch {
                        op: "batch_norm",
                        detail: format!("running stats of width {} for input {:?}", mean.len(), xv.shape()),
                    });
                }
                (mean, var, false, None)
            }
        };

        let inv_std: Vec<S> = var.iter().map(|&v| S::ONE / (v + eps).sqrt()).collect();
        let mut x_hat = Matrix::zeros(n, d);
        for r in 0..n {
            let src = xv.row(r);
            let dst = x_hat.row_mut(r);
            for j in 0..d {
                dst[j] = (src[j] - mean[j]) * inv_std[j];
            }
        }
        let mut y = Matrix::zeros(n, d);
        let g = self.nodes[gamma].value.row(0).to_vec();
        let b = self.nodes[beta].value.row(0).to_vec();
        for r in 0..n {
            let src = x_hat.row(r);
            let dst = y.row_mut(r);
            for j in 0..d {
                dst[j] = g[j] * src[j] + b[j];
            }
        }
        let needs = self.any_needs_grad(&[x, gamma, beta]);
        let id = self.push(
            y,
            Op::BatchNorm {
                x,
                gamma,
                beta,
                x_hat,
                inv_std,
                batch_coupled,
            },
            needs,
        );
        Ok((id, emitted))
    }

    /// Columnwise max over rows, result 1 x d. Gradient routes to the first
    /// row attaining each maximum.
    pub fn max_pool_rows(&mut self, x: NodeId) -> Result<NodeId, NnError> {
        let xv = &self.nodes[x].value;
        let (n, d) = xv.shape();
        if n == 0 {
            return Err(NnError::EmptyInput { op: "max_pool_rows" });
        }
        let mut best = xv.row(0).to_vec();
        let mut argmax = vec![0usize; d];
        for r in 1..n {
            for (j, &v) in xv.row(r).iter().enumerate() {
                if v > best[j] {
                    best[j] = v;
                    argmax[j] = r;
                }
            }
        }
        let value = Matrix::from_vec(1, d, best)?;
        let needs = self.nodes[x].needs_grad;
        Ok(self.push(value, Op::MaxPoolRows { x, argmax }, needs))
    }

    /// Per-column argmax row indices of a previous max-pool over `x`;
    /// recomputed on demand for inspection.
    pub fn rows_argmax(&self, x: NodeId) -> Vec<usize> {
        let xv = &self.nodes[x].value;
        let (n, d) = xv.shape();
        let mut best = xv.row(0).to_vec();
        let mut argmax = vec![0usize; d];
        for r in 1..n {
            for (j, &v) in xv.row(r).iter().enumerate() {
                if v > best[j] {
                    best[j] = v;
                    argmax[j] = r;
                }
            }
        }
        argmax
    }

    /// y[i] = x[idx[i]].
    pub fn gather_rows(&mut self, x: NodeId, idx: &[usize]) -> Result<NodeId, NnError> {
        let xv = &self.nodes[x].value;
        let d = xv.cols();
        let mut y = Matrix::zeros(idx.len(), d);
        for (i, &r) in idx.iter().enumerate() {
            if r >= xv.rows() {
                return Err(NnError::ShapeMismatch {
                    op: "gather_rows",
                    detail: format!("row {r} out of {}", xv.rows()),
                });
            }
            y.row_mut(i).copy_from_slice(xv.row(r));
        }
        let needs = self.nodes[x].needs_grad;
        Ok(self.push(
            y,
            Op::GatherRows {
                x,
                idx: idx.to_vec(),
            },
            needs,
        ))
    }

    /// y has `out_rows` rows; y[t] = sum of x rows i with target[i] = t.
    pub fn scatter_add_rows(
        &mut self,
        x: NodeId,
        target: &[usize],
        out_rows: usize,
    ) -> Result<NodeId, NnError> {
        let xv = &self.nodes[x].value;
        if target.len() != xv.rows() {
            return Err(NnError::ShapeMismatch {
                op: "scatter_add_rows",
                detail: format!("{} targets for {} rows", target.len(), xv.rows()),
            });
        }
        let mut y = Matrix::zeros(out_rows, xv.cols());
        for (i, &t) in target.iter().enumerate() {
            if t >= out_rows {
                return Err(NnError::ShapeMismatch {
                    op: "scatter_add_rows",
                    detail: format!("target {t} out of {out_rows}"),
                });
            }
            let src = xv.row(i);
            let dst = y.row_mut(t);
            for (o, &v) in dst.iter_mut().zip(src) {
                *o += v;
            }
        }
        let needs = self.nodes[x].needs_grad;
        Ok(self.push(
            y,
            Op::ScatterAddRows {
                x,
                target: target.to_vec(),
            },
            needs,
        ))
    }

    /// Horizontal concatenation; all parts share the row count.
    pub fn concat_cols(&mut self, parts: &[NodeId]) -> Result<NodeId, NnError> {
        if parts.is_empty() {
            return Err(NnError::EmptyInput { op: "concat_cols" });
        }
        let n = self.nodes[parts[0]].value.rows();
        let total: usize = parts.iter().map(|&p| self.nodes[p].value.cols()).sum();
        let mut y = Matrix::zeros(n, total);
        let mut col = 0;
        for &p in parts {
            let pv = &self.nodes[p].value;
            if pv.rows() != n {
                return Err(NnError::ShapeMismatch {
                    op: "concat_cols",
                    detail: format!("{} rows vs {}", pv.rows(), n),
                });
            }
            for r in 0..n {
                y.row_mut(r)[col..col + pv.cols()].copy_from_slice(pv.row(r));
            }
            col += pv.cols();
        }
        let needs = self.any_needs_grad(parts);
        Ok(self.push(
            y,
            Op::ConcatCols {
                parts: parts.to_vec(),
            },
            needs,
        ))
    }

    /// Vertical stacking; all parts share the column count.
    pub fn concat_rows(&mut self, parts: &[NodeId]) -> Result<NodeId, NnError> {
        if parts.is_empty() {
            return Err(NnError::EmptyInput { op: "concat_rows" });
        }
        let d = self.nodes[parts[0]].value.cols();
        let total: usize = parts.iter().map(|&p| self.nodes[p].value.rows()).sum();
        let mut y = Matrix::zeros(total, d);
        let mut row = 0;
        for &p in parts {
            let pv = &self.nodes[p].value;
            if pv.cols() != d {
                return Err(NnError::ShapeMismatch {
                    op: "concat_rows",
                    detail: format!("{} cols vs {}", pv.cols(), d),
                });
            }
            for r in 0..pv.rows() {
                y.row_mut(row + r).copy_from_slice(pv.row(r));
            }
            row += pv.rows();
        }
        let needs = self.any_needs_grad(parts);
        Ok(self.push(
            y,
            Op::ConcatRows {
                parts: parts.to_vec(),
            },
            needs,
        ))
    }

    /// y[i] = x[i] * scale[i] for a constant per-row scale.
    pub fn scale_rows(&mut self, x: NodeId, scale: &[S]) -> Result<NodeId, NnError> {
        let xv = &self.nodes[x].value;
        if scale.len() != xv.rows() {
            return Err(NnError::ShapeMismatch {
                op: "scale_rows",
                detail: format!("{} scales for {} rows", scale.len(), xv.rows()),
            });
        }
        let mut y = xv.clone();
        for (r, &c) in scale.iter().enumerate() {
            for v in y.row_mut(r) {
                *v *= c;
            }
        }
        let needs = self.nodes[x].needs_grad;
        Ok(self.push(
            y,
            Op::ScaleRows {
                x,
                scale: scale.to_vec(),
            },
            needs,
        ))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, NnError> {
        let y = self.nodes[a].value.add(&self.nodes[b].value)?;
        let needs = self.any_needs_grad(&[a, b]);
        Ok(self.push(y, Op::Add { a, b }, needs))
    }

    /// Mean over rows of -log softmax(logits)[label], numerically stabilized
    /// by max subtraction. Result is 1x1.
    pub fn softmax_cross_entropy(
        &mut self,
        logits: NodeId,
        labels: &[usize],
    ) -> Result<NodeId, NnError> {
        let lv = &self.nodes[logits].value;
        let (n, k) = lv.shape();
        if labels.len() != n {
            return Err(NnError::ShapeMismatch {
                op: "softmax_cross_entropy",
                detail: format!("{} labels for {} rows", labels.len(), n),
            });
        }
        if n == 0 {
            return Err(NnError::EmptyInput {
                op: "softmax_cross_entropy",
            });
        }
        let mut probs = Matrix::zeros(n, k);
        let mut total = S::ZERO;
        for (r, &label) in labels.iter().enumerate() {
            if label >= k {
                return Err(NnError::ShapeMismatch {
                    op: "softmax_cross_entropy",
                    detail: format!("label {label} out of {k} classes"),
                });
            }
            let row = lv.row(r);
            let mut m = row[0];
            for &v in row {
                if v > m {
                    m = v;
                }
            }
            let mut z = S::ZERO;
            for &v in row {
                z += (v - m).exp();
            }
            let dst = probs.row_mut(r);
            for (j, &v) in row.iter().enumerate() {
                dst[j] = (v - m).exp() / z;
            }
            total += z.ln() - (row[label] - m);
        }
        let loss = total / S::from_f64(n as f64);
        let value = Matrix::from_vec(1, 1, vec![loss])?;
        let needs = self.nodes[logits].needs_grad;
        Ok(self.push(
            value,
            Op::SoftmaxXent {
                logits,
                labels: labels.to_vec(),
                probs,
            },
            needs,
        ))
    }

    /// Backpropagates from a scalar loss node. Every parameter leaf reached
    /// by the loss gets a gradient; a second call is an error.
    pub fn backward(&mut self, loss: NodeId) -> Result<Gradients<S>, NnError> {
        if self.consumed {
            return Err(NnError::BackwardAlreadyRun);
        }
        self.consumed = true;
        if self.nodes[loss].value.shape() != (1, 1) {
            return Err(NnError::LossNotScalar);
        }

        let mut grads: Vec<Option<Matrix<S>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss] = Some(Matrix::filled(1, 1, S::ONE));

        let add_grad = |grads: &mut Vec<Option<Matrix<S>>>, id: NodeId, g: Matrix<S>| {
            match &mut grads[id] {
                Some(acc) => acc.add_assign(&g).expect("gradient shape"),
                slot @ None => *slot = Some(g),
            }
        };

        for id in (0..=loss).rev() {
            let Some(dy) = grads[id].take() else { continue };
            if !self.nodes[id].needs_grad {
                continue;
            }
            match &self.nodes[id].op {
                Op::Leaf { .. } => {
                    grads[id] = Some(dy);
                }
                Op::Affine { x, w, b } => {
                    let (x, w, b) = (*x, *w, *b);
                    let xv = &self.nodes[x].value;
                    let wv = &self.nodes[w].value;
                    if self.nodes[x].needs_grad {
                        let dx = dy.matmul_nt(wv)?;
                        add_grad(&mut grads, x, dx);
                    }
                    if self.nodes[w].needs_grad {
                        let dw = xv.matmul_tn(&dy)?;
                        add_grad(&mut grads, w, dw);
                    }
                    if self.nodes[b].needs_grad {
                        let mut db = Matrix::zeros(1, dy.cols());
                        for r in 0..dy.rows() {
                            for (o, &v) in db.row_mut(0).iter_mut().zip(dy.row(r)) {
                                *o += v;
                            }
                        }
                        add_grad(&mut grads, b, db);
                    }
                }
                Op::Relu { x } => {
                    let x = *x;
                    let xv = &self.nodes[x].value;
                    let mut dx = dy;
                    for (g, &v) in dx.values_mut().iter_mut().zip(xv.values()) {
                        if v <= S::ZERO {
                            *g = S::ZERO;
                        }
                    }
                    add_grad(&mut grads, x, dx);
                }
                Op::BatchNorm {
                    x,
                    gamma,
                    beta,
                    x_hat,
                    inv_std,
                    batch_coupled,
                } => {
                    let (x, gamma, beta) = (*x, *gamma, *beta);
                    let (n, d) = x_hat.shape();
                    let gv = self.nodes[gamma].value.row(0).to_vec();

                    if self.nodes[gamma].needs_grad {
                        let mut dg = Matrix::zeros(1, d);
                        for r in 0..n {
                            for j in 0..d {
                                dg.row_mut(0)[j] += dy.get(r, j) * x_hat.get(r, j);
                            }
                        }
                        add_grad(&mut grads, gamma, dg);
                    }
                    if self.nodes[beta].needs_grad {
                        let mut db = Matrix::zeros(1, d);
                        for r in 0..n {
                            for (o, &v) in db.row_mut(0).iter_mut().zip(dy.row(r)) {
                                *o += v;
                            }
                        }
                        add_grad(&mut grads, beta, db);
                    }
                    if self.nodes[x].needs_grad {
                        let mut dx = Matrix::zeros(n, d);
                        if *batch_coupled {
                            // Full gradient through the batch statistics.
                            let inv_n = S::ONE / S::from_f64(n as f64);
                            let mut sum_dy = vec![S::ZERO; d];
                            let mut sum_dy_xhat = vec![S::ZERO; d];
                            for r in 0..n {
                                for j in 0..d {
                                    sum_dy[j] += dy.get(r, j);
                                    sum_dy_xhat[j] += dy.get(r, j) * x_hat.get(r, j);
                                }
                            }
                            for r in 0..n {
                                for j in 0..d {
                                    let term = dy.get(r, j)
                                        - sum_dy[j] * inv_n
                                        - x_hat.get(r, j) * sum_dy_xhat[j] * inv_n;
                                    dx.set(r, j, gv[j] * inv_std[j] * term);
                                }
                            }
                        } else {
                            for r in 0..n {
                                for j in 0..d {
                                    dx.set(r, j, dy.get(r, j) * gv[j] * inv_std[j]);
                                }
                            }
                        }
                        add_grad(&mut grads, x, dx);
                    }
                }
                Op::MaxPoolRows { x, argmax } => {
                    let x = *x;
                    let xv = &self.nodes[x].value;
                    let mut dx = Matrix::zeros(xv.rows(), xv.cols());
                    for (j, &r) in argmax.iter().enumerate() {
                        dx.set(r, j, dy.get(0, j));
                    }
                    add_grad(&mut grads, x, dx);
                }
                Op::GatherRows { x, idx } => {
                    let x = *x;
                    let xv = &self.nodes[x].value;
                    let mut dx = Matrix::zeros(xv.rows(), xv.cols());
                    for (i, &r) in idx.iter().enumerate() {
                        let src = dy.row(i);
                        let dst = dx.row_mut(r);
                        for (o, &v) in dst.iter_mut().zip(src) {
                            *o += v;
                        }
                    }
                    add_grad(&mut grads, x, dx);
                }
                Op::ScatterAddRows { x, target } => {
                    let x = *x;
                    let cols = dy.cols();
                    let mut dx = Matrix::zeros(target.len(), cols);
                    for (i, &t) in target.iter().enumerate() {
                        dx.row_mut(i).copy_from_slice(dy.row(t));
                    }
                    add_grad(&mut grads, x, dx);
                }
                Op::ConcatCols { parts } => {
                    let parts = parts.clone();
                    let mut col = 0;
                    for p in parts {
                        let pv = &self.nodes[p].value;
                        let (n, c) = pv.shape();
                        if self.nodes[p].needs_grad {
                            let mut dp = Matrix::zeros(n, c);
                            for r in 0..n {
                                dp.row_mut(r).copy_from_slice(&dy.row(r)[col..col + c]);
                            }
                            add_grad(&mut grads, p, dp);
                        }
                        col += c;
                    }
                }
                Op::ConcatRows { parts } => {
                    let parts = parts.clone();
                    let mut row = 0;
                    for p in parts {
                        let pv = &self.nodes[p].value;
                        let (n, c) = pv.shape();
                        if self.nodes[p].needs_grad {
                            let mut dp = Matrix::zeros(n, c);
                            for r in 0..n {
                                dp.row_mut(r).copy_from_slice(dy.row(row + r));
                            }
                            add_grad(&mut grads, p, dp);
                        }
                        row += n;
                    }
                }
                Op::ScaleRows { x, scale } => {
                    let x = *x;
                    let mut dx = dy;
                    for (r, &c) in scale.iter().enumerate() {
                        for v in dx.row_mut(r) {
                            *v *= c;
                        }
                    }
                    add_grad(&mut grads, x, dx);
                }
                Op::Add { a, b } => {
                    let (a, b) = (*a, *b);
                    if self.nodes[a].needs_grad {
                        add_grad(&mut grads, a, dy.clone());
                    }
                    if self.nodes[b].needs_grad {
                        add_grad(&mut grads, b, dy);
                    }
                }
                Op::SoftmaxXent {
                    logits,
                    labels,
                    probs,
                } => {
                    let logits = *logits;
                    let scale = dy.get(0, 0) / S::from_f64(labels.len() as f64);
                    let mut dl = probs.clone();
                    for (r, &label) in labels.iter().enumerate() {
                        dl.row_mut(r)[label] -= S::ONE;
                    }
                    let dl = dl.scale(scale);
                    add_grad(&mut grads, logits, dl);
                }
            }
        }

        let mut by_param = HashMap::new();
        for (id, node) in self.nodes.iter().enumerate() {
            if let Op::Leaf { param: Some(p) } = node.op {
                if let Some(g) = grads[id].take() {
                    by_param.insert(p, g);
                }
            }
        }
        Ok(Gradients { by_param })
    }
}
