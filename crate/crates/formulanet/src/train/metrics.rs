//! Run metrics as ordered key=value records. Wall-clock entries use the
//! `time.` prefix so determinism checks can strip them.

use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MetricsLog {
    entries: Vec<(String, String)>,
}

impl MetricsLog {
    pub fn new() -> MetricsLog {
        MetricsLog::default()
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> MetricsLog {
        let mut log = MetricsLog::new();
        for line in text.lines() {
            if let Some((k, v)) = line.split_once('=') {
                log.push(k, v);
            }
        }
        log
    }

    /// Entries without wall-clock records, for run-to-run comparison.
    pub fn deterministic_entries(&self) -> Vec<(String, String)> {
        self.entries
            .iter()
            .filter(|(k, _)| !k.starts_with("time."))
            .cloned()
            .collect()
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_lookup() {
        let mut log = MetricsLog::new();
        log.push("epoch0.train_loss", 1.25);
        log.push("epoch0.lr", 0.001);
        log.push("time.epoch0_secs", 12.5);
        log.push("epoch0.train_loss", 0.75); // latest wins on lookup
        let back = MetricsLog::from_text(&log.to_text());
        assert_eq!(back, log);
        assert_eq!(log.get_f64("epoch0.train_loss"), Some(0.75));
        assert_eq!(log.deterministic_entries().len(), 3);
    }
}
