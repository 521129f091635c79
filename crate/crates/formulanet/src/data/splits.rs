//! Train/validation/test split manifests. Validation conjectures are held
//! out of the training file list by a seeded shuffle; the test list is
//! whatever the dataset designates.

use super::DataError;
use crate::rng::SplitMix64;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitManifest {
    pub seed: u64,
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
}

/// Holds out `n_val` conjectures from the training files, deterministically
/// per seed. The input order does not matter: files are sorted before the
/// shuffle.
pub fn make_splits(
    train_files: &[String],
    test_files: &[String],
    n_val: usize,
    seed: u64,
) -> Result<SplitManifest, DataError> {
    if n_val >= train_files.len() {
        return Err(DataError::InsufficientConjectures {
            have: train_files.len(),
            need: n_val,
        });
    }
    let mut sorted: Vec<String> = train_files.to_vec();
    sorted.sort();
    let mut rng = SplitMix64::new(seed);
    rng.shuffle(&mut sorted);
    let validation = sorted.split_off(sorted.len() - n_val);
    let mut train = sorted;
    train.sort();
    let mut validation = validation;
    validation.sort();
    let mut test: Vec<String> = test_files.to_vec();
    test.sort();
    Ok(SplitManifest {
        seed,
        train,
        validation,
        test,
    })
}

pub fn write_manifest(path: &Path, manifest: &SplitManifest) -> Result<(), DataError> {
    let mut out = format!("SPLITS seed={}\n", manifest.seed);
    for p in &manifest.train {
        out.push_str(&format!("TRAIN {p}\n"));
    }
    for p in &manifest.validation {
        out.push_str(&format!("VAL {p}\n"));
    }
    for p in &manifest.test {
        out.push_str(&format!("TEST {p}\n"));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<SplitManifest, DataError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(DataError::BadManifest {
        line: 1,
        reason: "empty manifest".to_string(),
    })?;
    let seed = header
        .strip_prefix("SPLITS seed=")
        .and_then(|s| s.trim().parse().ok())
        .ok_or(DataError::BadManifest {
            line: 1,
            reason: "expected `SPLITS seed=<n>` header".to_string(),
        })?;
    let mut manifest = SplitManifest {
        seed,
        train: Vec::new(),
        validation: Vec::new(),
        test: Vec::new(),
    };
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (tag, path) = line.split_once(' ').ok_or(DataError::BadManifest {
            line: idx + 1,
            reason: "expected `<TAG> <path>`".to_string(),
        })?;
        match tag {
            "TRAIN" => manifest.train.push(path.to_string()),
            "VAL" => manifest.validation.push(path.to_string()),
            "TEST" => manifest.test.push(path.to_string()),
            other => {
                return Err(DataError::BadManifest {
                    line: idx + 1,
                    reason: format!("unknown tag {other:?}"),
                })
            }
        }
    }
    Ok(manifest)
}
