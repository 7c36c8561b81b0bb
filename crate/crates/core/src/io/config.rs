use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Parsed `key = value` text grouped by `[section]` headers. Keys before the
/// first header belong to the section named `""`. `#` and `;` start comments.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConfigDocument {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

impl ConfigDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = Self::default();
        let mut section = String::new();
        for (no, raw) in text.lines().enumerate() {
            let line_no = no + 1;
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Config(format!("line {line_no}: unterminated section header")))?
                    .trim();
                if !valid_name(name) {
                    return Err(Error::Config(format!("line {line_no}: bad section name {name:?}")));
                }
                section = name.to_string();
                doc.sections.entry(section.clone()).or_default();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {line_no}: expected key = value")))?;
            let key = key.trim();
            if !valid_name(key) {
                return Err(Error::Config(format!("line {line_no}: bad key {key:?}")));
            }
            let entries = doc.sections.entry(section.clone()).or_default();
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {line_no}: duplicate key {key:?}")));
            }
        }
        Ok(doc)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section)?.get(key).map(String::as_str)
    }

    pub fn sections(&self) -> impl Iterator<Item = (&str, &BTreeMap<String, String>)> {
        self.sections.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Parsed value, or `None` when absent.
    pub fn parse_value<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<T>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("[{section}] {key}: cannot parse {v:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sections_comments_and_globals() {
        let doc = ConfigDocument::parse(
            "top = 1\n# comment\n[params]\nalpha = 0.5 ; trailing\n  lambda-re=1\n\n[grid]\nn = 1024\n",
        )
        .unwrap();
        assert_eq!(doc.get("", "top"), Some("1"));
        assert_eq!(doc.get("params", "alpha"), Some("0.5"));
        assert_eq!(doc.get("params", "lambda-re"), Some("1"));
        assert_eq!(doc.parse_value::<usize>("grid", "n").unwrap(), Some(1024));
        assert_eq!(doc.get("grid", "alpha"), None);
    }

    #[test]
    fn malformed_lines_rejected() {
        for bad in ["[open", "[]", "novalue", "= 3", "a b = 1", "a = 1\na = 2"] {
            assert!(matches!(ConfigDocument::parse(bad), Err(Error::Config(_))), "{bad:?}");
        }
    }

    #[test]
    fn unparsable_value_is_config_error() {
        let doc = ConfigDocument::parse("[p]\nalpha = half").unwrap();
        assert!(matches!(doc.parse_value::<f64>("p", "alpha"), Err(Error::Config(_))));
    }

    proptest! {
        #[test]
        fn never_panics(s in "\\PC*") {
            let _ = ConfigDocument::parse(&s);
        }

        #[test]
        fn rendered_entries_round_trip(entries in proptest::collection::btree_map("[a-z][a-z0-9_]{0,8}", "[a-zA-Z0-9.+-]{0,12}", 0..8)) {
            let text: String = std::iter::once("[s]\n".to_string())
                .chain(entries.iter().map(|(k, v)| format!("{k} = {v}\n")))
                .collect();
            let doc = ConfigDocument::parse(&text).unwrap();
            for (k, v) in &entries {
                prop_assert_eq!(doc.get("s", k), Some(v.as_str()));
            }
        }
    }
}
