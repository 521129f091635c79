//! Subcommand implementations. Machine-readable key=value output goes to
//! stdout; diagnostics go to stderr.

use formulanet::data::{
    build_vocab as data_build_vocab, load_split, parse_holstep_file, read_manifest, synth,
    write_manifest, DataError, ParseOptions,
};
use formulanet::graph::{
    build_graph, canonical_hash, enumerate_treelets, export_dot, rename_ast_variables,
    serialize_graph, GraphMode,
};
use formulanet::hol::{parse_text, print as print_ast, strip_turnstile, ParseError};
use formulanet::model::{PreparedGraph, Setting};
use formulanet::nn::NnError;
use formulanet::train::{
    evaluate_records, load_model, nearest_neighbors, train as train_run, TrainError,
    TrainRunConfig,
};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn io(message: impl ToString) -> CliError {
        CliError {
            code: 1,
            message: message.to_string(),
        }
    }

    fn user(message: impl ToString) -> CliError {
        CliError {
            code: 2,
            message: message.to_string(),
        }
    }

    fn internal(message: impl ToString) -> CliError {
        CliError {
            code: 3,
            message: message.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::io(e)
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        match e {
            DataError::Io(_) => CliError::io(e),
            _ => CliError::user(e),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Io(_) => CliError::io(e),
            TrainError::Data(inner) => inner.into(),
            TrainError::BadRunConfig(_) => CliError::user(e),
            TrainError::Nn(NnError::Io(_)) => CliError::io(e),
            TrainError::Nn(NnError::BadCheckpoint(_)) => CliError::user(e),
            _ => CliError::internal(e),
        }
    }
}

type CliResult = Result<(), CliError>;

/// Formats a parse error with line/column diagnostics for the given text.
fn parse_error_message(text: &str, err: &ParseError) -> String {
    let pos = match err {
        ParseError::IllegalCharacter { pos, .. }
        | ParseError::UnbalancedParens { pos }
        | ParseError::DanglingBinder { pos }
        | ParseError::UnexpectedToken { pos, .. } => Some(*pos),
        ParseError::EmptyExpression => None,
    };
    match pos {
        Some(pos) => {
            let upto = &text[..pos.min(text.len())];
            let line = upto.matches('\n').count() + 1;
            let column = upto.chars().rev().take_while(|&c| c != '\n').count() + 1;
            format!("{err} (line {line}, column {column})")
        }
        None => err.to_string(),
    }
}

fn parse_mode(mode: &str) -> Result<GraphMode, CliError> {
    GraphMode::from_str(mode).ok_or_else(|| {
        CliError::user(format!(
            "unknown graph mode {mode:?}; expected full, tree-old-names, tree-renamed or graph-old-names"
        ))
    })
}

fn sorted_dir_files(dir: &Path) -> Result<Vec<String>, CliError> {
    let mut files: Vec<String> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok())
        .filter(|entry| entry.path().is_file())
        .map(|entry| entry.path().to_string_lossy().to_string())
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::user(format!("no files in {}", dir.display())));
    }
    Ok(files)
}

#[allow(clippy::too_many_arguments)]
pub fn graph(
    formula: Option<String>,
    file: Option<PathBuf>,
    mode: String,
    dot: Option<PathBuf>,
    stats: bool,
    serialize: Option<PathBuf>,
    variables: Option<String>,
    hash: bool,
) -> CliResult {
    let text = match (formula, file) {
        (Some(text), None) => text,
        (None, Some(path)) => std::fs::read_to_string(&path)
            .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?,
        _ => return Err(CliError::user("pass exactly one of --formula or --file")),
    };
    let mode = parse_mode(&mode)?;
    let stripped = strip_turnstile(&text);
    let ast =
        parse_text(stripped).map_err(|e| CliError::user(parse_error_message(stripped, &e)))?;
    let listed: Vec<String> = variables
        .map(|v| v.split(',').map(|s| s.trim().to_string()).collect())
        .unwrap_or_default();
    let closed = ast.close(&|name| !listed.iter().any(|v| v == name));
    let graph = build_graph(&closed, mode);
    if stats {
        println!(
            "nodes={} edges={} treelets={}",
            graph.node_count(),
            graph.edge_count(),
            enumerate_treelets(&graph).len()
        );
    }
    if hash {
        println!("hash={}", canonical_hash(&graph));
    }
    if let Some(path) = dot {
        std::fs::write(&path, export_dot(&graph))
            .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    }
    if let Some(path) = serialize {
        std::fs::write(&path, serialize_graph(&graph))
            .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

pub fn build_vocab(train_dir: PathBuf, out: PathBuf, mode: String) -> CliResult {
    let mode = parse_mode(&mode)?;
    let files = sorted_dir_files(&train_dir)?;
    let records = load_split(&files, &ParseOptions::default())?;
    let vocab = data_build_vocab(&records, mode);
    let mut text = String::new();
    for token in vocab.tokens() {
        text.push_str(token);
        text.push('\n');
    }
    std::fs::write(&out, text)?;
    println!("vocab_size={}", vocab.len());
    println!("constants={}", vocab.len() - 3);
    Ok(())
}

pub fn make_splits(
    train_dir: PathBuf,
    test_dir: Option<PathBuf>,
    n_val: usize,
    seed: u64,
    out: PathBuf,
) -> CliResult {
    let train_files = sorted_dir_files(&train_dir)?;
    let test_files = match test_dir {
        Some(dir) => sorted_dir_files(&dir)?,
        None => Vec::new(),
    };
    let manifest = formulanet::data::make_splits(&train_files, &test_files, n_val, seed)?;
    write_manifest(&out, &manifest)?;
    println!(
        "train={} val={} test={}",
        manifest.train.len(),
        manifest.validation.len(),
        manifest.test.len()
    );
    Ok(())
}

pub struct TrainArgs {
    pub config: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub train_dir: Option<PathBuf>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub seed: Option<u64>,
    pub dim: Option<usize>,
    pub steps: Option<usize>,
    pub order_preserving: Option<bool>,
    pub setting: Option<String>,
    pub mode: Option<String>,
    pub learning_rate: Option<f64>,
    pub weight_decay: Option<f64>,
    pub lr_decay_factor: Option<f64>,
    pub val_conjectures: Option<usize>,
}

/// Reads a key=value file; `#` starts a comment line.
fn read_kv_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    let mut kv = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::user(format!("{}:{}: expected key=value", path.display(), idx + 1))
        })?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(kv)
}

pub fn train(args: TrainArgs) -> CliResult {
    // Defaults, overridden by the config file, overridden by flags.
    let mut kv = TrainRunConfig::desk().to_kv();
    if let Some(path) = &args.config {
        for (k, v) in read_kv_file(path)? {
            kv.insert(k, v);
        }
    }
    let mut set = |key: &str, value: Option<String>| {
        if let Some(v) = value {
            kv.insert(key.to_string(), v);
        }
    };
    set("epochs", args.epochs.map(|v| v.to_string()));
    set("batch_size", args.batch_size.map(|v| v.to_string()));
    set("seed", args.seed.map(|v| v.to_string()));
    set("dim", args.dim.map(|v| v.to_string()));
    set("steps", args.steps.map(|v| v.to_string()));
    set(
        "order_preserving",
        args.order_preserving.map(|v| v.to_string()),
    );
    set("setting", args.setting.clone());
    set("graph_mode", args.mode.clone());
    set("learning_rate", args.learning_rate.map(|v| v.to_string()));
    set("weight_decay", args.weight_decay.map(|v| v.to_string()));
    set(
        "lr_decay_factor",
        args.lr_decay_factor.map(|v| v.to_string()),
    );
    set(
        "val_conjectures",
        args.val_conjectures.map(|v| v.to_string()),
    );
    if let Some(dir) = &args.train_dir {
        kv.insert("train_dir".to_string(), dir.to_string_lossy().to_string());
    }

    let train_dir = kv
        .remove("train_dir")
        .ok_or_else(|| CliError::user("train_dir must be set via --train-dir or the config file"))?;
    // The update-MLP and classifier widths track --dim unless the config
    // file pins them explicitly.
    if args.dim.is_some() {
        let d = kv["dim"].clone();
        kv.insert("update_hidden".to_string(), d.clone());
        kv.insert("classifier_hidden".to_string(), d);
    }
    let known = TrainRunConfig::desk().to_kv();
    for key in kv.keys() {
        if !known.contains_key(key) {
            return Err(CliError::user(format!("unknown config key {key:?}")));
        }
    }
    let run = TrainRunConfig::from_kv(&kv)?;

    let files = sorted_dir_files(Path::new(&train_dir))?;
    let manifest = formulanet::data::make_splits(&files, &[], run.val_conjectures, run.seed)?;
    std::fs::create_dir_all(&args.out_dir)?;
    write_manifest(&args.out_dir.join("splits.txt"), &manifest)?;
    let train_records = load_split(&manifest.train, &ParseOptions::default())?;
    let val_records = load_split(&manifest.validation, &ParseOptions::default())?;

    let outcome = train_run(&run, &train_records, &val_records, &args.out_dir)?;
    for (k, v) in outcome.metrics.entries() {
        println!("{k}={v}");
    }
    println!("last_checkpoint={}", outcome.last_checkpoint.display());
    println!("best_checkpoint={}", outcome.best_checkpoint.display());
    Ok(())
}

pub fn eval(
    checkpoint: PathBuf,
    manifest: PathBuf,
    split: String,
    setting: Option<String>,
    renamed_seed: Option<u64>,
) -> CliResult {
    let loaded = load_model(&checkpoint)?;
    if let Some(setting) = setting {
        let requested = Setting::from_str(&setting)
            .ok_or_else(|| CliError::user(format!("unknown setting {setting:?}")))?;
        if requested != loaded.model.config.setting {
            return Err(CliError::user(format!(
                "checkpoint was trained in the {} setting",
                loaded.model.config.setting.as_str()
            )));
        }
    }
    let manifest = read_manifest(&manifest)?;
    let files = match split.as_str() {
        "train" => &manifest.train,
        "val" => &manifest.validation,
        "test" => &manifest.test,
        other => return Err(CliError::user(format!("unknown split {other:?}"))),
    };
    if files.is_empty() {
        return Err(CliError::user(format!("split {split:?} is empty")));
    }
    let records = load_split(files, &ParseOptions::default())?;
    let mut store = loaded.store;
    let report = evaluate_records(
        &loaded.model,
        &mut store,
        &loaded.vocab,
        &records,
        loaded.graph_mode,
        renamed_seed,
    )?;
    println!("split={split}");
    println!("pairs={}", report.pairs);
    println!("conjecture_graphs_built={}", report.conjecture_graphs_built);
    for (t, acc) in report.per_head_accuracy.iter().enumerate() {
        println!("acc_step{t}={acc:.6}");
    }
    println!("accuracy={:.6}", report.final_accuracy());
    Ok(())
}

pub fn embed(checkpoint: PathBuf, formula: String, out: Option<PathBuf>) -> CliResult {
    let loaded = load_model(&checkpoint)?;
    let stripped = strip_turnstile(&formula);
    let ast =
        parse_text(stripped).map_err(|e| CliError::user(parse_error_message(stripped, &e)))?;
    let graph = build_graph(&ast, loaded.graph_mode);
    let prepared = PreparedGraph::prepare(graph, &loaded.vocab);
    let mut store = loaded.store;
    let output = loaded
        .model
        .embed_graph(&mut store, &prepared)
        .map_err(TrainError::Model)?;
    let mut text = String::new();
    for (t, pooled) in output.pooled.iter().enumerate() {
        let values: Vec<String> = pooled.row(0).iter().map(|v| v.to_string()).collect();
        text.push_str(&format!("step{t}={}\n", values.join(",")));
    }
    print!("{text}");
    if let Some(path) = out {
        std::fs::write(&path, text)?;
    }
    Ok(())
}

pub fn nn_query(
    checkpoint: PathBuf,
    formula: String,
    node: usize,
    k: usize,
    step: Option<usize>,
    corpus: PathBuf,
) -> CliResult {
    let loaded = load_model(&checkpoint)?;
    let step = step.unwrap_or(loaded.model.config.steps);
    let parse_one = |text: &str| -> Result<PreparedGraph, CliError> {
        let stripped = strip_turnstile(text);
        let ast =
            parse_text(stripped).map_err(|e| CliError::user(parse_error_message(stripped, &e)))?;
        Ok(PreparedGraph::prepare(
            build_graph(&ast, loaded.graph_mode),
            &loaded.vocab,
        ))
    };
    let query = parse_one(&formula)?;
    let corpus_text = std::fs::read_to_string(&corpus)
        .map_err(|e| CliError::io(format!("{}: {e}", corpus.display())))?;
    let corpus_graphs: Vec<PreparedGraph> = corpus_text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(parse_one)
        .collect::<Result<_, _>>()?;
    if corpus_graphs.is_empty() {
        return Err(CliError::user("corpus file has no formulas"));
    }
    let refs: Vec<&PreparedGraph> = corpus_graphs.iter().collect();
    let mut store = loaded.store;
    let hits = nearest_neighbors(&loaded.model, &mut store, (&query, node), &refs, k, step)?;
    for (rank, hit) in hits.iter().enumerate() {
        println!(
            "rank={} graph={} node={} name={} distance={:.6}",
            rank + 1,
            hit.graph_index,
            hit.node,
            corpus_graphs[hit.graph_index].graph.name(hit.node),
            hit.distance
        );
    }
    Ok(())
}

pub fn rename_val(in_dir: PathBuf, out_dir: PathBuf, seed: u64) -> CliResult {
    let files = sorted_dir_files(&in_dir)?;
    std::fs::create_dir_all(&out_dir)?;
    let mut renamed_files = 0usize;
    for (file_idx, file) in files.iter().enumerate() {
        let path = Path::new(file);
        // Validates the file shape before rewriting.
        parse_holstep_file(path, &ParseOptions::default())?;
        let text = std::fs::read_to_string(path)?;
        let mut out = String::new();
        for (line_idx, line) in text.lines().enumerate() {
            let line_seed = seed
                .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                .wrapping_add((file_idx as u64) << 20)
                .wrapping_add(line_idx as u64);
            out.push_str(&rename_line(line, line_seed));
            out.push('\n');
        }
        let name = path
            .file_name()
            .ok_or_else(|| CliError::user(format!("bad path {file}")))?;
        std::fs::write(out_dir.join(name), out)?;
        renamed_files += 1;
    }
    println!("files={renamed_files}");
    Ok(())
}

/// Renames the formula part of a dataset line, leaving non-formula lines
/// and unparseable formulas untouched.
fn rename_line(line: &str, seed: u64) -> String {
    let Some((prefix, rest)) = line.split_at_checked(2) else {
        return line.to_string();
    };
    if !matches!(prefix, "C " | "+ " | "- " | "T ") {
        return line.to_string();
    }
    let stripped = strip_turnstile(rest);
    match parse_text(stripped) {
        Ok(ast) => {
            let renamed = rename_ast_variables(&ast, seed);
            format!("{prefix}|- {}", print_ast(&renamed))
        }
        Err(_) => line.to_string(),
    }
}

pub fn synth(
    out_dir: PathBuf,
    conjectures: usize,
    test_conjectures: usize,
    statements: usize,
    seed: u64,
) -> CliResult {
    if statements % 2 != 0 {
        return Err(CliError::user("--statements must be even (balanced labels)"));
    }
    let spec = synth::SynthSpec {
        train_conjectures: conjectures,
        test_conjectures,
        statements_per_conjecture: statements,
        seed,
    };
    let (train_files, test_files) = synth::write_corpus(&out_dir, &spec)?;
    println!("train_files={}", train_files.len());
    println!("test_files={}", test_files.len());
    println!("train_dir={}", out_dir.join("train").display());
    println!("test_dir={}", out_dir.join("test").display());
    Ok(())
}
