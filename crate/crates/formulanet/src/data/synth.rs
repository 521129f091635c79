//! Deterministic synthetic corpus in HolStep file format, for desk-scale
//! training runs and property tests (the real dataset is a large download
//! and is not bundled).
//!
//! Labels carry two kinds of signal:
//!
//! * a structural one — positives contain a composed pair `sig (aux leaf)`,
//!   negatives the reversed composition `aux (sig leaf)`, with identical
//!   token multisets, so bag-of-words heads sit at chance while one update
//!   step separates the classes;
//! * a name one — bound variables in positives draw from the `u*` pool and
//!   in negatives from the `w*` pool, which only graphs that keep original
//!   names can exploit (and renamed validation takes away).
//!
//! A fraction of statements carries only the name signal, so name-keeping
//! ablations measurably degrade under renaming while the full graph mode is
//! unaffected.

use super::DataError;
use crate::hol::{print, Ast};
use crate::rng::SplitMix64;
use std::path::{Path, PathBuf};

const SIGNAL_PAIRS: usize = 6;
const LEAVES: usize = 10;
const FILLER_PREDS: usize = 8;
const VAR_POOL: usize = 4;
/// Fraction (out of 100) of statements with only the name signal.
const NAME_ONLY_PERCENT: u64 = 30;

#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub train_conjectures: usize,
    pub test_conjectures: usize,
    /// Statements per conjecture, half positive and half negative.
    pub statements_per_conjecture: usize,
    pub seed: u64,
}

fn leaf_name(rng: &mut SplitMix64) -> String {
    format!("c{}", rng.next_below(LEAVES as u64))
}

fn var_name(rng: &mut SplitMix64, positive: bool) -> String {
    let pool = if positive { "u" } else { "w" };
    format!("{pool}{}", rng.next_below(VAR_POOL as u64))
}

/// A small label-independent atom; binder variables come from the
/// label-dependent pool.
fn filler(rng: &mut SplitMix64, positive: bool) -> Ast {
    let p = format!("p{}", rng.next_below(FILLER_PREDS as u64));
    match rng.next_below(3) {
        0 => Ast::apply(&p, vec![Ast::leaf(&leaf_name(rng))]),
        1 => Ast::apply(
            &p,
            vec![Ast::leaf(&leaf_name(rng)), Ast::leaf(&leaf_name(rng))],
        ),
        _ => {
            let v = var_name(rng, positive);
            Ast::quantifier("!", &v, Ast::apply(&p, vec![Ast::leaf(&v)]))
        }
    }
}

/// A binder-carrying filler, so name-only statements always contain a
/// bound variable.
fn bound_filler(rng: &mut SplitMix64, positive: bool) -> Ast {
    let p = format!("p{}", rng.next_below(FILLER_PREDS as u64));
    let v = var_name(rng, positive);
    Ast::quantifier("!", &v, Ast::apply(&p, vec![Ast::leaf(&v)]))
}

fn conjoin(mut parts: Vec<Ast>) -> Ast {
    let mut out = parts.pop().expect("at least one conjunct");
    while let Some(part) = parts.pop() {
        out = Ast::apply("/\\", vec![part, out]);
    }
    out
}

/// One labeled statement. Every statement contains at least one bound
/// variable, so the name signal is always present for graphs that keep
/// original names; the structural signal is absent from the name-only
/// slice.
pub fn synth_statement(rng: &mut SplitMix64, positive: bool) -> Ast {
    let name_only = rng.next_below(100) < NAME_ONLY_PERCENT;
    let mut conjuncts = vec![bound_filler(rng, positive)];
    if !name_only {
        let k = rng.next_below(SIGNAL_PAIRS as u64);
        let sig = format!("sig{k}");
        let aux = format!("aux{k}");
        let leaf = Ast::leaf(&leaf_name(rng));
        let pattern = if positive {
            Ast::apply(&sig, vec![Ast::apply(&aux, vec![leaf])])
        } else {
            Ast::apply(&aux, vec![Ast::apply(&sig, vec![leaf])])
        };
        conjuncts.push(pattern);
    }
    for _ in 0..1 + rng.next_below(2) {
        conjuncts.push(filler(rng, positive));
    }
    rng.shuffle(&mut conjuncts);
    conjoin(conjuncts)
}

/// Conjecture text: label-independent fillers with a neutral variable pool.
fn synth_conjecture(rng: &mut SplitMix64) -> Ast {
    let mut conjuncts = Vec::new();
    for _ in 0..2 + rng.next_below(2) {
        let p = format!("p{}", rng.next_below(FILLER_PREDS as u64));
        let atom = match rng.next_below(2) {
            0 => Ast::apply(&p, vec![Ast::leaf(&leaf_name(rng))]),
            _ => {
                let v = format!("z{}", rng.next_below(VAR_POOL as u64));
                Ast::quantifier("!", &v, Ast::apply(&p, vec![Ast::leaf(&v)]))
            }
        };
        conjuncts.push(atom);
    }
    conjoin(conjuncts)
}

/// Random closed formula for property suites: every leaf either refers to a
/// bound variable in scope or is a constant.
pub fn random_closed_formula(rng: &mut SplitMix64, max_depth: usize) -> Ast {
    fn go(rng: &mut SplitMix64, depth: usize, scope: &mut Vec<String>) -> Ast {
        let pick_leaf = |rng: &mut SplitMix64, scope: &[String]| {
            if !scope.is_empty() && rng.next_below(3) == 0 {
                Ast::leaf(&scope[rng.next_below(scope.len() as u64) as usize])
            } else {
                Ast::leaf(&format!("k{}", rng.next_below(14)))
            }
        };
        if depth == 0 {
            return pick_leaf(rng, scope);
        }
        match rng.next_below(10) {
            0 | 1 => pick_leaf(rng, scope),
            2 | 3 | 4 => {
                let binder = crate::hol::BINDERS[rng.next_below(5) as usize];
                let var = format!("b{}", rng.next_below(10));
                scope.push(var.clone());
                let body = go(rng, depth - 1, scope);
                scope.pop();
                Ast::quantifier(binder, &var, body)
            }
            5 | 6 => {
                let op = crate::hol::INFIX_OPS[rng.next_below(5) as usize];
                let lhs = go(rng, depth - 1, scope);
                let rhs = go(rng, depth - 1, scope);
                Ast::apply(op, vec![lhs, rhs])
            }
            _ => {
                let head = if !scope.is_empty() && rng.next_below(4) == 0 {
                    scope[rng.next_below(scope.len() as u64) as usize].clone()
                } else {
                    format!("h{}", rng.next_below(10))
                };
                let args = (0..1 + rng.next_below(3))
                    .map(|_| go(rng, depth - 1, scope))
                    .collect();
                Ast::apply(&head, args)
            }
        }
    }
    go(rng, max_depth, &mut Vec::new())
}

fn write_conjecture_file(
    path: &Path,
    name: &str,
    rng: &mut SplitMix64,
    statements: usize,
) -> Result<(), DataError> {
    assert!(statements % 2 == 0, "statement count must be even");
    let conjecture = synth_conjecture(rng);
    let mut lines = Vec::new();
    lines.push(format!("N {name}"));
    let ctext = print(&conjecture);
    lines.push(format!("C |- {ctext}"));
    lines.push(format!("T |- {ctext}"));
    lines.push(format!("D dep_of_{name}"));

    let half = statements / 2;
    let mut labeled: Vec<bool> = std::iter::repeat(true)
        .take(half)
        .chain(std::iter::repeat(false).take(half))
        .collect();
    rng.shuffle(&mut labeled);
    for positive in labeled {
        let stmt = synth_statement(rng, positive);
        let text = print(&stmt);
        let tag = if positive { '+' } else { '-' };
        lines.push(format!("{tag} |- {text}"));
        lines.push(format!("T |- {text}"));
    }
    std::fs::write(path, lines.join("\n") + "\n")?;
    Ok(())
}

/// Writes `train/<n>` and `test/<n>` HolStep-format files under `dir`.
/// Byte-identical output for identical specs.
pub fn write_corpus(dir: &Path, spec: &SynthSpec) -> Result<(Vec<String>, Vec<String>), DataError> {
    let mut rng = SplitMix64::new(spec.seed);
    let train_dir = dir.join("train");
    let test_dir = dir.join("test");
    std::fs::create_dir_all(&train_dir)?;
    std::fs::create_dir_all(&test_dir)?;
    let mut train_paths = Vec::new();
    for i in 0..spec.train_conjectures {
        let path: PathBuf = train_dir.join(format!("{i:05}"));
        write_conjecture_file(
            &path,
            &format!("synth_train_{i}"),
            &mut rng,
            spec.statements_per_conjecture,
        )?;
        train_paths.push(path.to_string_lossy().to_string());
    }
    let mut test_paths = Vec::new();
    for i in 0..spec.test_conjectures {
        let path: PathBuf = test_dir.join(format!("{i:05}"));
        write_conjecture_file(
            &path,
            &format!("synth_test_{i}"),
            &mut rng,
            spec.statements_per_conjecture,
        )?;
        test_paths.push(path.to_string_lossy().to_string());
    }
    Ok((train_paths, test_paths))
}
