//! Model configuration and its key=value text form.

use super::{ModelError, Setting};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    /// Embedding dimension d.
    pub dim: usize,
    /// Number of update steps T; 0 reduces the model to bag-of-words.
    pub steps: usize,
    /// Adds the treelet update terms when true.
    pub order_preserving: bool,
    /// Hidden width of the two-layer update functions.
    pub update_hidden: usize,
    /// Hidden width of the classifier heads.
    pub classifier_hidden: usize,
    pub vocab_size: usize,
    pub setting: Setting,
}

impl ModelConfig {
    /// Desk-scale defaults; the full-scale configuration uses dim 256 and
    /// 1909 vocabulary entries.
    pub fn desk(vocab_size: usize) -> ModelConfig {
        ModelConfig {
            dim: 64,
            steps: 1,
            order_preserving: false,
            update_hidden: 64,
            classifier_hidden: 64,
            vocab_size,
            setting: Setting::Conditional,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.dim == 0 {
            return Err(ModelError::BadConfig("dim must be >= 1".to_string()));
        }
        if self.update_hidden == 0 || self.classifier_hidden == 0 {
            return Err(ModelError::BadConfig("hidden widths must be >= 1".to_string()));
        }
        if self.vocab_size < 3 {
            return Err(ModelError::BadConfig(
                "vocabulary must include the reserved tokens".to_string(),
            ));
        }
        Ok(())
    }

    /// Width of a classifier head input at the configured setting.
    pub fn head_input(&self) -> usize {
        match self.setting {
            Setting::Conditional => 2 * self.dim,
            Setting::Unconditional => self.dim,
        }
    }

    pub fn to_kv(&self) -> BTreeMap<String, String> {
        let mut kv = BTreeMap::new();
        kv.insert("dim".to_string(), self.dim.to_string());
        kv.insert("steps".to_string(), self.steps.to_string());
        kv.insert(
            "order_preserving".to_string(),
            self.order_preserving.to_string(),
        );
        kv.insert("update_hidden".to_string(), self.update_hidden.to_string());
        kv.insert(
            "classifier_hidden".to_string(),
            self.classifier_hidden.to_string(),
        );
        kv.insert("vocab_size".to_string(), self.vocab_size.to_string());
        kv.insert("setting".to_string(), self.setting.as_str().to_string());
        kv
    }

    pub fn from_kv(kv: &BTreeMap<String, String>) -> Result<ModelConfig, ModelError> {
        fn parse<T: std::str::FromStr>(
            kv: &BTreeMap<String, String>,
            key: &str,
        ) -> Result<T, ModelError> {
            kv.get(key)
                .ok_or_else(|| ModelError::BadConfig(format!("missing key {key}")))?
                .parse()
                .map_err(|_| ModelError::BadConfig(format!("bad value for {key}")))
        }
        let setting = kv
            .get("setting")
            .and_then(|s| Setting::from_str(s))
            .ok_or_else(|| ModelError::BadConfig("missing or bad setting".to_string()))?;
        let config = ModelConfig {
            dim: parse(kv, "dim")?,
            steps: parse(kv, "steps")?,
            order_preserving: parse(kv, "order_preserving")?,
            update_hidden: parse(kv, "update_hidden")?,
            classifier_hidden: parse(kv, "classifier_hidden")?,
            vocab_size: parse(kv, "vocab_size")?,
            setting,
        };
        config.validate()?;
        Ok(config)
    }
}
