use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Keys accepted in each config section.
const KNOWN: &[(&str, &[&str])] = &[
    ("run", &["seed", "jobs"]),
    (
        "paths",
        &[
            "quotes",
            "forecasts",
            "features",
            "model",
            "report",
            "trace",
            "importance",
        ],
    ),
    ("synth", &["options", "days", "signal"]),
    (
        "qrm",
        &["beta", "nx", "nt", "cg_tol", "cg_max_iter", "method"],
    ),
    ("split", &["train", "val", "test", "temporal"]),
    (
        "tree",
        &[
            "criterion",
            "max_depth",
            "min_samples_split",
            "feature_fraction",
        ],
    ),
    (
        "gbm",
        &[
            "stages",
            "learning_rate",
            "max_depth",
            "min_samples_split",
            "leaf_step",
        ],
    ),
    (
        "forest",
        &[
            "trees",
            "bootstrap",
            "criterion",
            "max_depth",
            "min_samples_split",
            "feature_fraction",
        ],
    ),
    ("search", &["space", "random"]),
];

/// Drops a `#` comment that follows whitespace, so values may still contain `#`.
fn strip_trailing_comment(raw: &str) -> &str {
    raw.char_indices()
        .find(|&(i, c)| c == '#' && i > 0 && raw[..i].ends_with(char::is_whitespace))
        .map_or(raw, |(i, _)| &raw[..i])
}

/// Flat `key = value` settings grouped under `[section]` headers.
/// `#` and `;` start comment lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Config::default();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| Error::Parse { line, message };
            let trimmed = strip_trailing_comment(raw).trim();
            if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with(';') {
                continue;
            }
            if let Some(name) = trimmed.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let name = name.trim();
                if !KNOWN.iter().any(|(s, _)| *s == name) {
                    return Err(err(format!("unknown section `[{name}]`")));
                }
                current = Some(name.to_string());
                config.sections.entry(name.to_string()).or_default();
                continue;
            }
            let (key, value) = trimmed
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{trimmed}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let section = current
                .as_deref()
                .ok_or_else(|| err(format!("`{key}` appears before any [section]")))?;
            let allowed = KNOWN
                .iter()
                .find(|(s, _)| *s == section)
                .map(|(_, k)| *k)
                .unwrap_or(&[]);
            if !allowed.contains(&key) {
                return Err(err(format!("unknown key `{key}` in [{section}]")));
            }
            let slot = config
                .sections
                .get_mut(section)
                .expect("section created on header");
            if slot.insert(key.to_string(), value.to_string()).is_some() {
                return Err(err(format!("duplicate key `{key}` in [{section}]")));
            }
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section)?.get(key).map(String::as_str)
    }

    /// Typed lookup; a present but unparsable value is an error.
    pub fn value<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                Error::invalid(format!("config [{section}] {key}: cannot parse `{raw}`"))
            }),
        }
    }

    pub fn section(&self, name: &str) -> impl Iterator<Item = (&str, &str)> {
        self.sections
            .get(name)
            .into_iter()
            .flat_map(|m| m.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }
}
