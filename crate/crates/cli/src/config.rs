//! Optional `key = value` settings file. Command-line flags take precedence.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

pub const KEYS: [&str; 11] = [
    "model",
    "method",
    "iterations",
    "burn-in",
    "inner-steps",
    "seed",
    "out",
    "reps",
    "sizes",
    "jsb",
    "weibull",
];

#[derive(Debug, Default, Clone, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, (String, usize)>,
}

impl Settings {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let Some((k, v)) = t.split_once('=') else {
                return Err(CliError::Usage(format!("{origin}:{}: expected `key = value`", i + 1)));
            };
            let key = k.trim().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!(
                    "{origin}:{}: unknown key `{}` (known: {})",
                    i + 1,
                    k.trim(),
                    KEYS.join(", ")
                )));
            }
            values.insert(key, (v.trim().to_string(), i + 1));
        }
        Ok(Settings { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Flag value if given, else the parsed config entry.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some((raw, line)) => raw
                .parse()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("config line {line}: invalid value {raw:?} for `{key}`"))),
        }
    }
}

/// Comma-separated list of numbers.
pub fn parse_list<T: FromStr>(raw: &str, what: &str) -> Result<Vec<T>, CliError> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("invalid {what} entry {:?} in {raw:?}", s.trim())))
        })
        .collect()
}
