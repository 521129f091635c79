//! Token vocabulary: dense indices for every constant name seen in
//! training graphs, plus the three reserved tokens VAR, VARFUNC and UNKNOWN
//! appended at the end. Unseen names map to UNKNOWN.

use crate::graph::{VARFUNC_TOKEN, VAR_TOKEN};
use std::collections::{BTreeSet, HashMap};

pub const UNKNOWN_TOKEN: &str = "UNKNOWN";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    unknown: usize,
}

impl Vocabulary {
    /// Builds from the node names observed in training graphs. Names equal
    /// to the reserved tokens are dropped before the reserved tokens are
    /// appended, so the reserved indices are unique.
    pub fn build(names: impl IntoIterator<Item = String>) -> Vocabulary {
        let mut sorted: BTreeSet<String> = names.into_iter().collect();
        for reserved in [VAR_TOKEN, VARFUNC_TOKEN, UNKNOWN_TOKEN] {
            sorted.remove(reserved);
        }
        let mut tokens: Vec<String> = sorted.into_iter().collect();
        tokens.push(VAR_TOKEN.to_string());
        tokens.push(VARFUNC_TOKEN.to_string());
        tokens.push(UNKNOWN_TOKEN.to_string());
        Self::from_tokens(tokens).expect("constructed token list is valid")
    }

    /// Restores a vocabulary from an ordered token list (checkpoint or
    /// vocab file). The three reserved tokens must be present.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Vocabulary, String> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, tok) in tokens.iter().enumerate() {
            if tok.is_empty() {
                return Err(format!("empty token at index {i}"));
            }
            if index.insert(tok.clone(), i).is_some() {
                return Err(format!("duplicate token {tok:?}"));
            }
        }
        for reserved in [VAR_TOKEN, VARFUNC_TOKEN, UNKNOWN_TOKEN] {
            if !index.contains_key(reserved) {
                return Err(format!("reserved token {reserved:?} missing"));
            }
        }
        let unknown = index[UNKNOWN_TOKEN];
        Ok(Vocabulary {
            tokens,
            index,
            unknown,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Index of `name`, falling back to UNKNOWN for novel tokens.
    pub fn index_of(&self, name: &str) -> usize {
        self.index.get(name).copied().unwrap_or(self.unknown)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn token(&self, idx: usize) -> &str {
        &self.tokens[idx]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn unknown_index(&self) -> usize {
        self.unknown
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_corpus_has_three_specials() {
        let v = Vocabulary::build(Vec::new());
        assert_eq!(v.len(), 3);
        assert_eq!(v.token(0), "VAR");
        assert_eq!(v.token(1), "VARFUNC");
        assert_eq!(v.token(2), "UNKNOWN");
    }

    #[test]
    fn specials_are_appended_after_sorted_constants() {
        let v = Vocabulary::build(["P", "c", "/\\", "P"].map(String::from));
        assert_eq!(v.len(), 6);
        assert_eq!(v.token(v.len() - 1), "UNKNOWN");
        assert!(v.index_of("P") < v.len() - 3);
    }

    #[test]
    fn novel_tokens_map_to_unknown() {
        let v = Vocabulary::build(["P".to_string()]);
        assert_eq!(v.index_of("never_seen"), v.unknown_index());
        assert_ne!(v.index_of("P"), v.unknown_index());
    }

    #[test]
    fn var_tokens_in_input_are_not_duplicated() {
        let v = Vocabulary::build(["VAR", "P", "VARFUNC"].map(String::from));
        assert_eq!(v.len(), 4);
    }

    #[test]
    fn from_tokens_validates() {
        assert!(Vocabulary::from_tokens(vec!["VAR".into(), "VARFUNC".into()]).is_err());
        assert!(Vocabulary::from_tokens(vec![
            "a".into(),
            "a".into(),
            "VAR".into(),
            "VARFUNC".into(),
            "UNKNOWN".into()
        ])
        .is_err());
    }

    #[test]
    fn deterministic_order() {
        let a = Vocabulary::build(["z", "a", "m"].map(String::from));
        let b = Vocabulary::build(["m", "z", "a"].map(String::from));
        assert_eq!(a, b);
    }
}
