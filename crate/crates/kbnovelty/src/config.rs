//! `key=value` files, used for run configs and split manifests.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::triples::open;

/// Ordered key/value pairs. Keys are unique.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyValues(Vec<(String, String)>);

impl KeyValues {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets `key`, replacing an earlier value in place.
    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        let key = key.into();
        let value = value.to_string();
        match self.0.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.0.push((key, value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parses a `key=value` file. Blank lines and `#` comments are skipped;
    /// whitespace around keys and values is trimmed.
    pub fn parse(reader: impl BufRead, path: &Path) -> Result<Self> {
        let mut out = Self::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::parse(path, i + 1, "expected `key=value`"));
            };
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::parse(path, i + 1, "empty key"));
            }
            if out.get(k).is_some() {
                return Err(Error::parse(path, i + 1, format!("duplicate key `{k}`")));
            }
            out.set(k, v.trim());
        }
        Ok(out)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(open(path)?, path)
    }

    pub fn write(&self, w: &mut (impl Write + ?Sized)) -> std::io::Result<()> {
        for (k, v) in &self.0 {
            writeln!(w, "{k}={v}")?;
        }
        Ok(())
    }

    /// Required value parsed with `FromStr`.
    pub fn require<T: std::str::FromStr>(&self, key: &str, path: &Path) -> Result<T> {
        let raw = self.get(key).ok_or_else(|| Error::format(path, format!("missing key `{key}`")))?;
        raw.parse().map_err(|_| Error::format(path, format!("bad value `{raw}` for `{key}`")))
    }
}
