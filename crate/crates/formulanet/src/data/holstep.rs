//! HolStep-format files: prefix-coded lines, one conjecture per file.
//!
//! ```text
//! N <conjecture name>
//! C <conjecture text>
//! T <tokenization of the preceding formula>   (preferred parse input)
//! D <dependency>                              (ignored)
//! + <useful statement>
//! - <non-useful statement>
//! ```

use super::DataError;
use crate::hol::{parse_text, Ast};
use std::collections::HashSet;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct Statement {
    /// The text actually parsed (the `T` line when present, else the raw line).
    pub text: String,
    pub ast: Ast,
}

#[derive(Debug, Clone)]
pub struct ConjectureRecord {
    pub name: String,
    pub conjecture_text: String,
    pub conjecture: Ast,
    pub positives: Vec<Statement>,
    pub negatives: Vec<Statement>,
    /// Statements skipped because they failed to parse (never silently
    /// dropped; ingestion is lossless modulo this count).
    pub skipped: usize,
}

impl ConjectureRecord {
    pub fn pair_count(&self) -> usize {
        self.positives.len() + self.negatives.len()
    }
}

/// How free names in dataset formulas are classified.
#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    /// When `Some`, names outside the set are treated as free variables and
    /// closed under universal quantifiers. When `None` (the dataset ships no
    /// constant table), every unbound name is a constant and only
    /// binder-bound names are variables.
    pub constant_names: Option<HashSet<String>>,
}

impl ParseOptions {
    fn close(&self, ast: Ast) -> Ast {
        match &self.constant_names {
            None => ast,
            Some(set) => ast.close(&|name| set.contains(name)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LineKind {
    Name,
    Conjecture,
    Dependency,
    Positive,
    Negative,
}

pub fn parse_holstep_file(path: &Path, options: &ParseOptions) -> Result<ConjectureRecord, DataError> {
    let text = std::fs::read_to_string(path)?;
    let display = path.display().to_string();
    let malformed = |line: usize, reason: &str| DataError::MalformedLine {
        path: display.clone(),
        line,
        reason: reason.to_string(),
    };

    // First pass: items with their preferred parse text (T overrides raw).
    struct Item {
        kind: LineKind,
        raw: String,
        tokenized: Option<String>,
        line: usize,
    }
    let mut items: Vec<Item> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cut = line.len().min(2);
        if !line.is_char_boundary(cut) {
            return Err(malformed(lineno, "line must start with a one-byte prefix"));
        }
        let (prefix, rest) = line.split_at(cut);
        let rest = rest.to_string();
        let kind = match prefix.trim_end() {
            "N" => LineKind::Name,
            "C" => LineKind::Conjecture,
            "D" => LineKind::Dependency,
            "+" => LineKind::Positive,
            "-" => LineKind::Negative,
            "T" => {
                match items.last_mut() {
                    Some(item) if item.tokenized.is_none() => item.tokenized = Some(rest),
                    _ => return Err(malformed(lineno, "T line without a preceding formula")),
                }
                continue;
            }
            other => return Err(malformed(lineno, &format!("unknown prefix {other:?}"))),
        };
        items.push(Item {
            kind,
            raw: rest,
            tokenized: None,
            line: lineno,
        });
    }

    let mut name = None;
    let mut conjecture: Option<(String, Ast)> = None;
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    let mut skipped = 0usize;

    for item in items {
        let parse_input = item.tokenized.as_ref().unwrap_or(&item.raw);
        match item.kind {
            LineKind::Name => {
                if name.replace(item.raw.trim().to_string()).is_some() {
                    return Err(malformed(item.line, "duplicate N line"));
                }
            }
            LineKind::Conjecture => {
                if conjecture.is_some() {
                    return Err(malformed(item.line, "duplicate C line"));
                }
                let ast = parse_text(parse_input).map_err(|e| DataError::UnparseableFormula {
                    path: display.clone(),
                    line: item.line,
                    detail: e.to_string(),
                })?;
                conjecture = Some((parse_input.clone(), options.close(ast)));
            }
            LineKind::Dependency => {}
            LineKind::Positive | LineKind::Negative => {
                match parse_text(parse_input) {
                    Ok(ast) => {
                        let stmt = Statement {
                            text: parse_input.clone(),
                            ast: options.close(ast),
                        };
                        if item.kind == LineKind::Positive {
                            positives.push(stmt);
                        } else {
                            negatives.push(stmt);
                        }
                    }
                    Err(_) => skipped += 1,
                }
            }
        }
    }

    let name = name.ok_or_else(|| malformed(0, "missing N line"))?;
    let (conjecture_text, conjecture) =
        conjecture.ok_or_else(|| malformed(0, "missing C line"))?;
    Ok(ConjectureRecord {
        name,
        conjecture_text,
        conjecture,
        positives,
        negatives,
        skipped,
    })
}

/// Reads every file of a split list in order.
pub fn load_split(
    paths: &[String],
    options: &ParseOptions,
) -> Result<Vec<ConjectureRecord>, DataError> {
    paths
        .iter()
        .map(|p| parse_holstep_file(Path::new(p), options))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(dir: &Path, name: &str, content: &str) -> std::path::PathBuf {
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    fn tmp_dir(tag: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("fnet-holstep-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn parses_small_file() {
        let dir = tmp_dir("small");
        let path = write_file(
            &dir,
            "0001",
            "N conj_one\nC |- !x. P x\n+ |- P c\n+ |- Q c\n- |- R c\n- |- S c\n",
        );
        let record = parse_holstep_file(&path, &ParseOptions::default()).unwrap();
        assert_eq!(record.name, "conj_one");
        assert_eq!(record.positives.len(), 2);
        assert_eq!(record.negatives.len(), 2);
        assert_eq!(record.skipped, 0);
        assert_eq!(record.pair_count(), 4);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn missing_conjecture_is_malformed() {
        let dir = tmp_dir("noc");
        let path = write_file(&dir, "0002", "N nameless\n+ |- P c\n");
        match parse_holstep_file(&path, &ParseOptions::default()) {
            Err(DataError::MalformedLine { reason, .. }) => {
                assert!(reason.contains("missing C"), "{reason}");
            }
            other => panic!("expected MalformedLine, got {other:?}"),
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn unknown_prefix_is_malformed() {
        let dir = tmp_dir("prefix");
        let path = write_file(&dir, "0003", "N n\nC |- P c\nX whatever\n");
        assert!(matches!(
            parse_holstep_file(&path, &ParseOptions::default()),
            Err(DataError::MalformedLine { line: 3, .. })
        ));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn tokenized_line_preferred_over_raw() {
        // The raw C text is unparseable garbage; the T line parses.
        let dir = tmp_dir("tline");
        let path = write_file(
            &dir,
            "0004",
            "N t\nC |- ((((\nT |- !x. P x\n+ |- ((((\nT |- Q c\n",
        );
        let record = parse_holstep_file(&path, &ParseOptions::default()).unwrap();
        assert_eq!(record.positives.len(), 1);
        assert_eq!(record.positives[0].text, "|- Q c");
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn unparseable_statements_are_counted_not_dropped() {
        let dir = tmp_dir("skip");
        let path = write_file(
            &dir,
            "0005",
            "N s\nC |- P c\n+ |- Q c\n+ |- ((broken\n- |- R c\n",
        );
        let record = parse_holstep_file(&path, &ParseOptions::default()).unwrap();
        assert_eq!(record.positives.len(), 1);
        assert_eq!(record.negatives.len(), 1);
        assert_eq!(record.skipped, 1);
        // pairs_in == pairs_emitted + pairs_skipped
        assert_eq!(3, record.pair_count() + record.skipped);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn dependency_lines_ignored_even_with_tokenization() {
        let dir = tmp_dir("dep");
        let path = write_file(
            &dir,
            "0006",
            "N d\nC |- P c\nD SOME_DEP\nT |- dep tokenization\n+ |- Q c\n",
        );
        let record = parse_holstep_file(&path, &ParseOptions::default()).unwrap();
        assert_eq!(record.positives.len(), 1);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn constant_table_closes_free_variables() {
        let dir = tmp_dir("close");
        let path = write_file(&dir, "0007", "N c\nC |- P x\n+ |- Q x y\n");
        let mut constants = HashSet::new();
        constants.insert("P".to_string());
        constants.insert("Q".to_string());
        let options = ParseOptions {
            constant_names: Some(constants),
        };
        let record = parse_holstep_file(&path, &options).unwrap();
        // x is closed under a fresh universal quantifier.
        assert_eq!(record.conjecture, parse_text("!x. P x").unwrap());
        assert_eq!(
            record.positives[0].ast,
            parse_text("!x. !y. Q x y").unwrap()
        );
        // Default: everything unbound stays a constant.
        let plain = parse_holstep_file(&path, &ParseOptions::default()).unwrap();
        assert_eq!(plain.conjecture, parse_text("P x").unwrap());
        std::fs::remove_dir_all(&dir).ok();
    }
}
