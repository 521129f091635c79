//! RMSProp with weight decay folded into the gradient, plus the running-
//! statistics update rule shared by the batch-norm layers.

use super::{BnBatchStats, Gradients, Matrix, NnError, ParamId, ParamStore, Scalar};
use std::collections::HashMap;

/// Momentum for batch-norm running statistics.
pub const BN_MOMENTUM: f64 = 0.1;

/// Per-parameter squared-gradient accumulator plus hyperparameters.
#[derive(Debug, Clone)]
pub struct RmsProp<S> {
    pub learning_rate: f64,
    pub decay_rate: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
    pub step_count: u64,
    acc: HashMap<ParamId, Matrix<S>>,
}

impl<S: Scalar> RmsProp<S> {
    pub fn new(learning_rate: f64, weight_decay: f64) -> RmsProp<S> {
        RmsProp {
            learning_rate,
            decay_rate: 0.9,
            epsilon: 1e-8,
            weight_decay,
            step_count: 0,
            acc: HashMap::new(),
        }
    }

    /// One update: g <- g + wd * theta; acc <- rho acc + (1 - rho) g^2;
    /// theta <- theta - lr * g / (sqrt(acc) + eps). Applies to every
    /// trainable entry; entries the loss never reached see a zero gradient
    /// (so only weight decay moves them).
    pub fn step(
        &mut self,
        store: &mut ParamStore<S>,
        grads: &Gradients<S>,
    ) -> Result<(), NnError> {
        let lr = S::from_f64(self.learning_rate);
        let rho = S::from_f64(self.decay_rate);
        let one_minus_rho = S::from_f64(1.0 - self.decay_rate);
        let eps = S::from_f64(self.epsilon);
        let wd = S::from_f64(self.weight_decay);

        let ids: Vec<ParamId> = store.trainable_ids().collect();
        for id in ids {
            let g = store.grad_or_zero(grads, id);
            let theta = store.value(id);
            if g.shape() != theta.shape() {
                return Err(NnError::ShapeMismatch {
                    op: "rmsprop_step",
                    detail: format!(
                        "grad {:?} vs param {:?} ({})",
                        g.shape(),
                        theta.shape(),
                        store.name(id)
                    ),
                });
            }
            let acc = self
                .acc
                .entry(id)
                .or_insert_with(|| Matrix::zeros(theta.rows(), theta.cols()));

            let theta = store.value_mut(id);
            for ((t, &gi), a) in theta
                .values_mut()
                .iter_mut()
                .zip(g.values())
                .zip(acc.values_mut())
            {
                let grad = gi + wd * *t;
                *a = rho * *a + one_minus_rho * grad * grad;
                *t -= lr * grad / (a.sqrt() + eps);
            }
        }
        self.step_count += 1;
        Ok(())
    }

    /// Divides the learning rate, for the per-epoch schedule.
    pub fn decay_learning_rate(&mut self, factor: f64) {
        self.learning_rate /= factor;
    }

    pub(crate) fn accumulators(&self) -> impl Iterator<Item = (ParamId, &Matrix<S>)> {
        self.acc.iter().map(|(&id, m)| (id, m))
    }

    pub(crate) fn set_accumulator(&mut self, id: ParamId, m: Matrix<S>) {
        self.acc.insert(id, m);
    }
}

/// Folds batch statistics into running statistics with the usual momentum
/// rule; the variance stored is the unbiased estimate.
pub fn update_running_stats<S: Scalar>(
    running_mean: &mut Matrix<S>,
    running_var: &mut Matrix<S>,
    batch: &BnBatchStats<S>,
) {
    if batch.rows < 2 {
        return;
    }
    let m = S::from_f64(BN_MOMENTUM);
    let keep = S::from_f64(1.0 - BN_MOMENTUM);
    let unbias = S::from_f64(batch.rows as f64 / (batch.rows as f64 - 1.0));
    for (rm, &bm) in running_mean.values_mut().iter_mut().zip(&batch.mean) {
        *rm = keep * *rm + m * bm;
    }
    for (rv, &bv) in running_var.values_mut().iter_mut().zip(&batch.var) {
        *rv = keep * *rv + m * bv * unbias;
    }
}
