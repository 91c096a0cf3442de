//! Flat `key = value` text files used for manifests and configs.
//!
//! Blank lines and lines starting with `#` are ignored. Keys may not repeat.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvFile {
    context: String,
    entries: BTreeMap<String, String>,
}

impl KvFile {
    pub fn parse(text: &str, context: impl Into<String>) -> Result<Self> {
        let context = context.into();
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::parse(&context, format!("line {}: expected `key = value`", n + 1))
            })?;
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(Error::parse(&context, format!("line {}: empty key", n + 1)));
            }
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(Error::parse(&context, format!("duplicate key `{key}`")));
            }
        }
        Ok(KvFile { context, entries })
    }

    pub fn context(&self) -> &str {
        &self.context
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::parse(&self.context, format!("missing key `{key}`")))
    }

    /// Parses `key` if present.
    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::parse(&self.context, format!("`{key}` = `{v}`: {e}")))
            })
            .transpose()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.insert(key.into(), value.into());
    }
}

/// Renders entries one per line, in the given order.
pub fn render<'a>(entries: impl IntoIterator<Item = (&'a str, String)>) -> String {
    entries
        .into_iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_values() {
        let kv = KvFile::parse("# c\n\na = 1\n b=two words \n", "t").unwrap();
        assert_eq!(kv.get("a"), Some("1"));
        assert_eq!(kv.get("b"), Some("two words"));
        assert_eq!(kv.parsed::<u32>("a").unwrap(), Some(1));
        assert!(kv.parsed::<u32>("b").is_err());
        assert!(kv.require("c").is_err());
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(KvFile::parse("novalue\n", "t").is_err());
        assert!(KvFile::parse("a = 1\na = 2\n", "t").is_err());
        assert!(KvFile::parse(" = 1\n", "t").is_err());
    }

    #[test]
    fn round_trip() {
        let text = render([("x", "1".to_string()), ("y.z", "a,b".to_string())]);
        let kv = KvFile::parse(&text, "t").unwrap();
        assert_eq!(kv.get("y.z"), Some("a,b"));
    }
}
