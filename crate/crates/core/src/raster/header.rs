use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Line-oriented `key = value` sidecar header. Key order is preserved so a
/// parsed header formats back to the same text.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Header {
    entries: Vec<(String, String)>,
}

impl Header {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut header = Header::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Format(format!("header line {}: expected `key = value`", n + 1))
            })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Format(format!("header line {}: empty key", n + 1)));
            }
            if header.get(k).is_some() {
                return Err(Error::Format(format!(
                    "header line {}: duplicate key `{k}`",
                    n + 1
                )));
            }
            header.entries.push((k.to_string(), v.trim().to_string()));
        }
        Ok(header)
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        let key = key.into();
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((key, value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Format(format!("header is missing `{key}`")))
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Format(format!("header key `{key}`: cannot parse `{v}`"))),
        }
    }

    pub fn required<T: FromStr>(&self, key: &str) -> Result<T> {
        self.parsed(key)?
            .ok_or_else(|| Error::Format(format!("header is missing `{key}`")))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_preserves_order() {
        let text = "width = 3\n# note\nheight = 2\n\nband.1.gain = 0.5\n";
        let h = Header::parse(text).unwrap();
        assert_eq!(h.required::<usize>("width").unwrap(), 3);
        assert_eq!(h.get("band.1.gain"), Some("0.5"));
        assert_eq!(h.to_text(), "width = 3\nheight = 2\nband.1.gain = 0.5\n");
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(Header::parse("width 3").is_err());
        assert!(Header::parse("a = 1\na = 2").is_err());
        assert!(Header::parse("width = x")
            .unwrap()
            .required::<usize>("width")
            .is_err());
    }
}
