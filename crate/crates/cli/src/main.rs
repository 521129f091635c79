//! Command-line front end for the premise-selection pipeline.
//!
//! Exit codes: 0 success, 1 i/o failure, 2 bad user input (including
//! formula parse errors), 3 internal invariant breach.

mod commands;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "formulanet", version, about = "Formula graphs, embeddings and premise selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a formula to a graph; print stats, export DOT or wire text.
    Graph {
        /// Formula text (mutually exclusive with --file).
        #[arg(long, conflicts_with = "file")]
        formula: Option<String>,
        /// Read the formula from a file.
        #[arg(long)]
        file: Option<PathBuf>,
        /// Graph mode: full, tree-old-names, tree-renamed, graph-old-names.
        #[arg(long, default_value = "full")]
        mode: String,
        /// Write a DOT rendering here.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Print node/edge/treelet counts.
        #[arg(long)]
        stats: bool,
        /// Write the line-oriented graph serialization here.
        #[arg(long)]
        serialize: Option<PathBuf>,
        /// Comma-separated names to treat as free variables (closed with
        /// universal quantifiers); all other unbound names are constants.
        #[arg(long)]
        variables: Option<String>,
        /// Print the canonical graph hash.
        #[arg(long)]
        hash: bool,
    },
    /// Build the token vocabulary from a directory of dataset files.
    BuildVocab {
        #[arg(long)]
        train_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "full")]
        mode: String,
    },
    /// Split training files into train/validation (+ optional test list).
    MakeSplits {
        #[arg(long)]
        train_dir: PathBuf,
        #[arg(long)]
        test_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 700)]
        n_val: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model; flags override config-file keys.
    Train {
        /// key=value config file (see README for keys).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        /// Directory of training files (config key: train_dir).
        #[arg(long)]
        train_dir: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        order_preserving: Option<bool>,
        /// conditional | unconditional
        #[arg(long)]
        setting: Option<String>,
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        weight_decay: Option<f64>,
        #[arg(long)]
        lr_decay_factor: Option<f64>,
        #[arg(long)]
        val_conjectures: Option<usize>,
    },
    /// Evaluate a checkpoint on a manifest split.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        /// train | val | test
        #[arg(long, default_value = "val")]
        split: String,
        /// Must match the checkpoint's setting when given.
        #[arg(long)]
        setting: Option<String>,
        /// Rename every bound variable with this seed before evaluation.
        #[arg(long)]
        renamed_seed: Option<u64>,
    },
    /// Embed one formula with a checkpoint; prints pooled vectors per step.
    Embed {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nearest corpus nodes to a query node's embedding.
    NnQuery {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Query formula.
        #[arg(long)]
        formula: String,
        /// Query node id in the compiled graph.
        #[arg(long)]
        node: usize,
        #[arg(short, default_value_t = 5)]
        k: usize,
        /// Embedding step to compare at (defaults to the last step).
        #[arg(long)]
        step: Option<usize>,
        /// File with one corpus formula per line.
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Rewrite dataset files with randomly renamed bound variables.
    RenameVal {
        #[arg(long)]
        in_dir: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        seed: u64,
    },
    /// Generate a synthetic corpus in the dataset file format.
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 200)]
        conjectures: usize,
        #[arg(long, default_value_t = 10)]
        test_conjectures: usize,
        #[arg(long, default_value_t = 100)]
        statements: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Graph {
            formula,
            file,
            mode,
            dot,
            stats,
            serialize,
            variables,
            hash,
        } => commands::graph(formula, file, mode, dot, stats, serialize, variables, hash),
        Command::BuildVocab { train_dir, out, mode } => commands::build_vocab(train_dir, out, mode),
        Command::MakeSplits {
            train_dir,
            test_dir,
            n_val,
            seed,
            out,
        } => commands::make_splits(train_dir, test_dir, n_val, seed, out),
        Command::Train {
            config,
            out_dir,
            train_dir,
            epochs,
            batch_size,
            seed,
            dim,
            steps,
            order_preserving,
            setting,
            mode,
            learning_rate,
            weight_decay,
            lr_decay_factor,
            val_conjectures,
        } => commands::train(commands::TrainArgs {
            config,
            out_dir,
            train_dir,
            epochs,
            batch_size,
            seed,
            dim,
            steps,
            order_preserving,
            setting,
            mode,
            learning_rate,
            weight_decay,
            lr_decay_factor,
            val_conjectures,
        }),
        Command::Eval {
            checkpoint,
            manifest,
            split,
            setting,
            renamed_seed,
        } => commands::eval(checkpoint, manifest, split, setting, renamed_seed),
        Command::Embed {
            checkpoint,
            formula,
            out,
        } => commands::embed(checkpoint, formula, out),
        Command::NnQuery {
            checkpoint,
            formula,
            node,
            k,
            step,
            corpus,
        } => commands::nn_query(checkpoint, formula, node, k, step, corpus),
        Command::RenameVal { in_dir, out_dir, seed } => commands::rename_val(in_dir, out_dir, seed),
        Command::Synth {
            out_dir,
            conjectures,
            test_conjectures,
            statements,
            seed,
        } => commands::synth(out_dir, conjectures, test_conjectures, statements, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
