//! Central finite-difference validation of analytic gradients, run in f64.

use super::{Gradients, ParamStore, Scalar};

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub worst_param: String,
    pub values_checked: usize,
}

/// Compares the analytic gradient of `loss_and_grads` against central
/// differences of `loss_only` over every trainable value in `store`.
/// Relative error uses a 1e-3 floor so near-zero gradients are compared
/// absolutely at 1e-7 precision.
pub fn check_gradients<S: Scalar>(
    store: &ParamStore<S>,
    h: f64,
    loss_and_grads: impl FnOnce(&ParamStore<S>) -> (f64, Gradients<S>),
    mut loss_only: impl FnMut(&ParamStore<S>) -> f64,
) -> GradCheckReport {
    let (_, grads) = loss_and_grads(store);
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_param: String::new(),
        values_checked: 0,
    };
    let ids: Vec<_> = store.trainable_ids().collect();
    for id in ids {
        let analytic = store.grad_or_zero(&grads, id);
        let count = analytic.values().len();
        for i in 0..count {
            let mut plus = store.clone();
            let v = plus.value(id).values()[i].to_f64();
            plus.value_mut(id).values_mut()[i] = S::from_f64(v + h);
            let f_plus = loss_only(&plus);

            let mut minus = store.clone();
            minus.value_mut(id).values_mut()[i] = S::from_f64(v - h);
            let f_minus = loss_only(&minus);

            let numeric = (f_plus - f_minus) / (2.0 * h);
            let a = analytic.values()[i].to_f64();
            let denom = a.abs().max(numeric.abs()).max(1e-3);
            let rel = (a - numeric).abs() / denom;
            report.values_checked += 1;
            if rel > report.max_rel_error {
                report.max_rel_error = rel;
                report.worst_param = format!("{}[{}]", store.name(id), i);
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{BnStats, Matrix, ParamStore, Tape};
    use crate::rng::SplitMix64;

    fn random_matrix(rng: &mut SplitMix64, r: usize, c: usize) -> Matrix<f64> {
        Matrix::from_vec(r, c, (0..r * c).map(|_| rng.next_range_f64(-1.0, 1.0)).collect()).unwrap()
    }

    /// affine -> batchnorm -> relu -> affine -> max-pool -> cross-entropy,
    /// covering every differentiable op in one composite graph.
    #[test]
    fn composite_network_matches_finite_differences() {
        let mut rng = SplitMix64::new(2024);
        let mut store = ParamStore::<f64>::new();
        store.add("x", random_matrix(&mut rng, 5, 3), true);
        store.add("w1", random_matrix(&mut rng, 3, 4), true);
        store.add("b1", random_matrix(&mut rng, 1, 4), true);
        store.add("gamma", random_matrix(&mut rng, 1, 4).map(|v| v + 2.0), true);
        store.add("beta", random_matrix(&mut rng, 1, 4), true);
        store.add("w2", random_matrix(&mut rng, 4, 2), true);
        store.add("b2", random_matrix(&mut rng, 1, 2), true);

        let run = |ps: &ParamStore<f64>| {
            let mut tape = Tape::new();
            let ids: Vec<_> = ps.ids().collect();
            let leaf: Vec<_> = ids.iter().map(|&id| tape.param(id, ps.value(id).clone())).collect();
            let h = tape.affine(leaf[0], leaf[1], leaf[2]).unwrap();
            let (bn, _) = tape
                .batch_norm(h, leaf[3], leaf[4], BnStats::Batch { lenient: false })
                .unwrap();
            let r = tape.relu(bn);
            let logits = tape.affine(r, leaf[5], leaf[6]).unwrap();
            let pooled = tape.max_pool_rows(logits).unwrap();
            let wide = tape.softmax_cross_entropy(pooled, &[1]).unwrap();
            let full = tape.softmax_cross_entropy(logits, &[0, 1, 0, 1, 0]).unwrap();
            let loss = tape.add(wide, full).unwrap();
            (tape.value(loss).get(0, 0), tape, loss)
        };

        let report = check_gradients(
            &store,
            1e-5,
            |ps| {
                let (v, mut tape, loss) = run(ps);
                (v, tape.backward(loss).unwrap())
            },
            |ps| run(ps).0,
        );
        assert!(report.values_checked > 40);
        assert!(
            report.max_rel_error < 1e-4,
            "max rel error {} at {}",
            report.max_rel_error,
            report.worst_param
        );
    }

    #[test]
    fn scatter_gather_scale_concat_match_finite_differences() {
        let mut rng = SplitMix64::new(97);
        let mut store = ParamStore::<f64>::new();
        store.add("x", random_matrix(&mut rng, 4, 3), true);

        let run = |ps: &ParamStore<f64>| {
            let mut tape = Tape::new();
            let id = ps.id("x").unwrap();
            let x = tape.param(id, ps.value(id).clone());
            let left = tape.gather_rows(x, &[0, 2, 1, 3, 2]).unwrap();
            let right = tape.gather_rows(x, &[1, 1, 0, 2, 3]).unwrap();
            let cat = tape.concat_cols(&[left, right]).unwrap();
            let scaled = tape.scale_rows(cat, &[0.5, 1.0, 0.25, 2.0, 1.5]).unwrap();
            let bucketed = tape.scatter_add_rows(scaled, &[0, 1, 0, 1, 0], 2).unwrap();
            let stacked = tape.concat_rows(&[bucketed, bucketed]).unwrap();
            let loss = tape.softmax_cross_entropy(stacked, &[0, 1, 1, 0]).unwrap();
            (tape.value(loss).get(0, 0), tape, loss)
        };

        let report = check_gradients(
            &store,
            1e-5,
            |ps| {
                let (v, mut tape, loss) = run(ps);
                (v, tape.backward(loss).unwrap())
            },
            |ps| run(ps).0,
        );
        assert_eq!(report.values_checked, 12);
        assert!(
            report.max_rel_error < 1e-4,
            "max rel error {} at {}",
            report.max_rel_error,
            report.worst_param
        );
    }
}
