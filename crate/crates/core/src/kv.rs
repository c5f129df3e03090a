//! Plain-text `key = value` files used for run configuration, generation
//! manifests, and filter reports.
//!
//! Lines are `key = value`, blank lines and `#` comments are ignored, keys
//! are unique, ordering is preserved on write so emitted files are stable.

use std::collections::BTreeMap;
use std::path::Path;

use crate::{Error, Result};

/// Parsed key-value document with deterministic key order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvMap {
    entries: BTreeMap<String, String>,
}

impl KvMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    path: origin.to_path_buf(),
                    line: idx + 1,
                    msg: format!("expected `key = value`, got {line:?}"),
                });
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(Error::Parse {
                    path: origin.to_path_buf(),
                    line: idx + 1,
                    msg: "empty key".into(),
                });
            }
            if entries.insert(key.clone(), value).is_some() {
                return Err(Error::Parse {
                    path: origin.to_path_buf(),
                    line: idx + 1,
                    msg: format!("duplicate key {key:?}"),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    /// Typed accessor; the key must be present and parse cleanly.
    pub fn parse_get<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self
            .get(key)
            .ok_or_else(|| Error::Config(format!("missing key {key:?}")))?;
        raw.parse()
            .map_err(|_| Error::Config(format!("key {key:?} has unparseable value {raw:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn origin() -> PathBuf {
        PathBuf::from("<test>")
    }

    #[test]
    fn parses_comments_and_blanks() {
        let text = "# header\n\nalpha = 1.5\n beta.gamma = hello world \n";
        let kv = KvMap::parse(text, &origin()).unwrap();
        assert_eq!(kv.get("alpha"), Some("1.5"));
        assert_eq!(kv.get("beta.gamma"), Some("hello world"));
    }

    #[test]
    fn rejects_duplicates_and_garbage() {
        assert!(KvMap::parse("a = 1\na = 2", &origin()).is_err());
        assert!(KvMap::parse("just some text", &origin()).is_err());
    }

    #[test]
    fn round_trips_text() {
        let text = "a = 1\nb = two\n";
        let kv = KvMap::parse(text, &origin()).unwrap();
        assert_eq!(kv.to_text(), text);
    }
}
