//! The training loop: RMSProp with weight decay, learning rate divided by a
//! fixed factor after each epoch, per-epoch validation and checkpointing.

use super::{evaluate_records, MetricsLog, TrainError};
use crate::data::{batch_stream, ConjectureRecord, GraphCache};
use crate::graph::GraphMode;
use crate::model::{
    Ctx, Model, ModelConfig, PairExample, Phase, PreparedGraph, Setting, Vocabulary,
};
use crate::nn::{
    read_checkpoint, write_checkpoint, Checkpoint, ParamStore, RmsProp, Scalar, Tape,
};
use crate::rng::SplitMix64;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainRunConfig {
    pub model: ModelConfig,
    pub graph_mode: GraphMode,
    pub learning_rate: f64,
    pub weight_decay: f64,
    /// Learning rate is divided by this after every epoch.
    pub lr_decay_factor: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Conjectures held out of the training files for validation.
    pub val_conjectures: usize,
}

impl TrainRunConfig {
    /// The training recipe at desk scale; vocab size is filled in once the
    /// training split is read.
    pub fn desk() -> TrainRunConfig {
        TrainRunConfig {
            model: ModelConfig::desk(3),
            graph_mode: GraphMode::Full,
            learning_rate: 0.001,
            weight_decay: 1e-4,
            lr_decay_factor: 3.0,
            epochs: 5,
            batch_size: 32,
            seed: 1,
            val_conjectures: 0,
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        if self.epochs == 0 {
            return Err(TrainError::BadRunConfig("epochs must be >= 1".to_string()));
        }
        if self.lr_decay_factor < 1.0 {
            return Err(TrainError::BadRunConfig(
                "lr_decay_factor must be >= 1".to_string(),
            ));
        }
        if self.batch_size == 0 {
            return Err(TrainError::BadRunConfig("batch_size must be >= 1".to_string()));
        }
        if self.learning_rate <= 0.0 {
            return Err(TrainError::BadRunConfig(
                "learning_rate must be positive".to_string(),
            ));
        }
        Ok(())
    }

    pub fn to_kv(&self) -> BTreeMap<String, String> {
        let mut kv = self.model.to_kv();
        kv.insert("graph_mode".to_string(), self.graph_mode.as_str().to_string());
        kv.insert("learning_rate".to_string(), self.learning_rate.to_string());
        kv.insert("weight_decay".to_string(), self.weight_decay.to_string());
        kv.insert(
            "lr_decay_factor".to_string(),
            self.lr_decay_factor.to_string(),
        );
        kv.insert("epochs".to_string(), self.epochs.to_string());
        kv.insert("batch_size".to_string(), self.batch_size.to_string());
        kv.insert("seed".to_string(), self.seed.to_string());
        kv.insert(
            "val_conjectures".to_string(),
            self.val_conjectures.to_string(),
        );
        kv
    }

    pub fn from_kv(kv: &BTreeMap<String, String>) -> Result<TrainRunConfig, TrainError> {
        fn parse<T: std::str::FromStr>(
            kv: &BTreeMap<String, String>,
            key: &str,
        ) -> Result<T, TrainError> {
            kv.get(key)
                .ok_or_else(|| TrainError::BadRunConfig(format!("missing key {key}")))?
                .parse()
                .map_err(|_| TrainError::BadRunConfig(format!("bad value for {key}")))
        }
        let model = ModelConfig::from_kv(kv).map_err(TrainError::Model)?;
        let graph_mode = kv
            .get("graph_mode")
            .and_then(|s| GraphMode::from_str(s))
            .ok_or_else(|| TrainError::BadRunConfig("missing or bad graph_mode".to_string()))?;
        let run = TrainRunConfig {
            model,
            graph_mode,
            learning_rate: parse(kv, "learning_rate")?,
            weight_decay: parse(kv, "weight_decay")?,
            lr_decay_factor: parse(kv, "lr_decay_factor")?,
            epochs: parse(kv, "epochs")?,
            batch_size: parse(kv, "batch_size")?,
            seed: parse(kv, "seed")?,
            val_conjectures: parse(kv, "val_conjectures")?,
        };
        run.validate()?;
        Ok(run)
    }
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub metrics: MetricsLog,
    pub last_checkpoint: PathBuf,
    pub best_checkpoint: PathBuf,
    pub vocab: Vocabulary,
}

fn epoch_seed(master: u64, epoch: usize) -> u64 {
    let mut rng = SplitMix64::new(master ^ 0x5eed_0000);
    let mut out = 0;
    for _ in 0..=epoch {
        out = rng.next_u64();
    }
    out
}

/// Saves a model checkpoint: parameters, vocabulary, config metadata and
/// optionally the optimizer state.
pub fn save_model<S: Scalar>(
    path: &Path,
    store: &ParamStore<S>,
    vocab: &Vocabulary,
    config: &ModelConfig,
    graph_mode: GraphMode,
    optimizer: Option<&RmsProp<S>>,
    extra_meta: &[(String, String)],
) -> Result<(), TrainError> {
    let mut meta = config.to_kv();
    meta.insert("graph_mode".to_string(), graph_mode.as_str().to_string());
    for (k, v) in extra_meta {
        meta.insert(k.clone(), v.clone());
    }
    let ckpt = Checkpoint {
        params: store.clone(),
        vocab: vocab.tokens().to_vec(),
        meta,
        optimizer: optimizer.cloned(),
    };
    write_checkpoint(path, &ckpt)?;
    Ok(())
}

#[derive(Debug)]
pub struct LoadedModel {
    pub model: Model,
    pub store: ParamStore<f32>,
    pub vocab: Vocabulary,
    pub graph_mode: GraphMode,
    pub optimizer: Option<RmsProp<f32>>,
    pub meta: BTreeMap<String, String>,
}

pub fn load_model(path: &Path) -> Result<LoadedModel, TrainError> {
    let ckpt: Checkpoint<f32> = read_checkpoint(path)?;
    let config = ModelConfig::from_kv(&ckpt.meta).map_err(TrainError::Model)?;
    let graph_mode = ckpt
        .meta
        .get("graph_mode")
        .and_then(|s| GraphMode::from_str(s))
        .ok_or_else(|| TrainError::BadRunConfig("checkpoint lacks graph_mode".to_string()))?;
    let vocab = Vocabulary::from_tokens(ckpt.vocab).map_err(TrainError::BadRunConfig)?;
    if vocab.len() != config.vocab_size {
        return Err(TrainError::Model(crate::model::ModelError::VocabMismatch {
            expected: config.vocab_size,
            got: vocab.len(),
        }));
    }
    let model = Model::lookup(config, &ckpt.params).map_err(TrainError::Model)?;
    Ok(LoadedModel {
        model,
        store: ckpt.params,
        vocab,
        graph_mode,
        optimizer: ckpt.optimizer,
        meta: ckpt.meta,
    })
}

/// Trains for the configured number of epochs. Deterministic for a fixed
/// config and seed: single-threaded numerics, seeded shuffles, seeded
/// initialization. Batches that shrink to a single pair are dropped (the
/// classifier-head batch statistics need at least two rows).
pub fn train(
    run: &TrainRunConfig,
    train_records: &[ConjectureRecord],
    val_records: &[ConjectureRecord],
    out_dir: &Path,
) -> Result<TrainOutcome, TrainError> {
    run.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let started = Instant::now();

    let vocab = crate::data::build_vocab(train_records, run.graph_mode);
    let mut config = run.model.clone();
    config.vocab_size = vocab.len();
    config.validate().map_err(TrainError::Model)?;

    let mut store = ParamStore::<f32>::new();
    let model = Model::init(config.clone(), &mut store, run.seed)?;
    let mut optimizer = RmsProp::<f32>::new(run.learning_rate, run.weight_decay);

    let mut metrics = MetricsLog::new();
    metrics.push("run.seed", run.seed);
    metrics.push("run.graph_mode", run.graph_mode.as_str());
    metrics.push("run.setting", config.setting.as_str());
    metrics.push("run.order_preserving", config.order_preserving);
    metrics.push("run.vocab_size", vocab.len());
    metrics.push("run.trainable_values", store.trainable_values());
    let train_pairs: usize = train_records.iter().map(|r| r.pair_count()).sum();
    let val_pairs: usize = val_records.iter().map(|r| r.pair_count()).sum();
    metrics.push("run.train_pairs", train_pairs);
    metrics.push("run.val_pairs", val_pairs);

    let conditional = config.setting == Setting::Conditional;
    let mut stmt_cache = GraphCache::new(run.graph_mode);
    let mut conj_graphs: Vec<Option<Arc<PreparedGraph>>> = vec![None; train_records.len()];

    let mut best_epoch = 0usize;
    let mut best_acc = f64::NEG_INFINITY;

    for epoch in 0..run.epochs {
        let epoch_start = Instant::now();
        let mut loss_sum = 0.0f64;
        let mut batches = 0usize;
        let mut dropped = 0usize;

        for (batch_idx, batch) in
            batch_stream(train_records, run.batch_size, epoch_seed(run.seed, epoch)).enumerate()
        {
            if batch.len() < 2 {
                dropped += 1;
                continue;
            }
            // Resolve graphs (cached by statement text / conjecture index).
            let mut resolved: Vec<(Option<Arc<PreparedGraph>>, Arc<PreparedGraph>, usize)> =
                Vec::with_capacity(batch.len());
            for pair in &batch {
                let conj = if conditional {
                    if conj_graphs[pair.record].is_none() {
                        let record = &train_records[pair.record];
                        let graph = crate::graph::build_graph(&record.conjecture, run.graph_mode);
                        conj_graphs[pair.record] =
                            Some(Arc::new(PreparedGraph::prepare(graph, &vocab)));
                    }
                    conj_graphs[pair.record].clone()
                } else {
                    None
                };
                let stmt = pair.statement(train_records);
                let graph = stmt_cache.prepared(&stmt.text, &stmt.ast, &vocab);
                resolved.push((conj, graph, pair.label()));
            }

            let mut tape = Tape::new();
            let mut ctx = Ctx::new(&mut tape, &mut store, Phase::Train, true);
            let examples: Vec<PairExample> = resolved
                .iter()
                .map(|(conj, stmt, label)| PairExample {
                    conjecture: conj.as_deref(),
                    statement: stmt,
                    label: *label,
                })
                .collect();
            let out = model.batch_forward(&mut ctx, &examples)?;
            let loss = tape.value(out.loss).get(0, 0) as f64;
            if !loss.is_finite() {
                return Err(TrainError::NanLoss {
                    epoch,
                    batch: batch_idx,
                });
            }
            let grads = tape.backward(out.loss)?;
            optimizer.step(&mut store, &grads)?;
            loss_sum += loss;
            batches += 1;
        }

        metrics.push(&format!("epoch{epoch}.lr"), optimizer.learning_rate);
        metrics.push(
            &format!("epoch{epoch}.train_loss"),
            format!("{:.6}", loss_sum / batches.max(1) as f64),
        );
        metrics.push(&format!("epoch{epoch}.batches"), batches);
        if dropped > 0 {
            metrics.push(&format!("epoch{epoch}.dropped_singleton_batches"), dropped);
        }

        if !val_records.is_empty() {
            let report = evaluate_records(
                &model,
                &mut store,
                &vocab,
                val_records,
                run.graph_mode,
                None,
            )?;
            for (t, acc) in report.per_head_accuracy.iter().enumerate() {
                metrics.push(&format!("epoch{epoch}.val_acc_step{t}"), format!("{acc:.6}"));
            }
            let acc = report.final_accuracy();
            if acc > best_acc {
                best_acc = acc;
                best_epoch = epoch;
            }
        }

        let epoch_path = out_dir.join(format!("epoch{epoch}.ckpt"));
        save_model(
            &epoch_path,
            &store,
            &vocab,
            &config,
            run.graph_mode,
            Some(&optimizer),
            &[("epoch".to_string(), epoch.to_string())],
        )?;
        metrics.push(
            &format!("time.epoch{epoch}_secs"),
            format!("{:.3}", epoch_start.elapsed().as_secs_f64()),
        );

        optimizer.decay_learning_rate(run.lr_decay_factor);
    }

    if val_records.is_empty() {
        best_epoch = run.epochs - 1;
    }
    metrics.push("final.best_epoch", best_epoch);
    let last_checkpoint = out_dir.join("last.ckpt");
    let best_checkpoint = out_dir.join("best.ckpt");
    std::fs::copy(
        out_dir.join(format!("epoch{}.ckpt", run.epochs - 1)),
        &last_checkpoint,
    )?;
    std::fs::copy(out_dir.join(format!("epoch{best_epoch}.ckpt")), &best_checkpoint)?;
    metrics.push("time.total_secs", format!("{:.3}", started.elapsed().as_secs_f64()));

    metrics.write(&out_dir.join("run.log"))?;
    Ok(TrainOutcome {
        metrics,
        last_checkpoint,
        best_checkpoint,
        vocab,
    })
}
