//! Flat `key = value` experiment configuration.
//!
//! Grammar: one `key = value` pair per line; `#` starts a comment; section
//! headers `[model]`, `[grid]`, `[solver]`, `[experiment]` scope the keys
//! that follow. Numbers are decimal with an optional exponent, booleans are
//! `true`/`false`. Every key a subcommand does not consume is rejected, so a
//! config cannot silently carry a misspelled or misplaced setting.

use std::cell::Cell;
use std::collections::BTreeMap;
use std::fmt;

/// Section names a config may open.
const SECTIONS: [&str; 4] = ["model", "grid", "solver", "experiment"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    /// A line that does not fit the grammar, or a value that does not parse
    /// as the requested type.
    ParseError { line: usize, reason: String },
    /// A key no consumer of this config recognizes.
    UnknownKey { key: String, line: usize },
    /// A key the active subcommand requires but the config does not set.
    MissingKey { key: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::ParseError { line, reason } => {
                write!(f, "config line {line}: {reason}")
            }
            ConfigError::UnknownKey { key, line } => {
                write!(f, "config line {line}: unknown key `{key}`")
            }
            ConfigError::MissingKey { key } => write!(f, "config is missing required key `{key}`"),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug)]
struct Entry {
    value: String,
    line: usize,
    consumed: Cell<bool>,
}

/// A parsed config: section-scoped keys with typed, consumption-tracked
/// accessors. Keys are addressed as `"section.key"`.
#[derive(Debug)]
pub struct ExperimentConfig {
    entries: BTreeMap<String, Entry>,
}

/// Parses config text; syntax errors carry the 1-based line number.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut entries = BTreeMap::new();
    let mut section: Option<&str> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(inner) = content.strip_prefix('[') {
            let Some(name) = inner.strip_suffix(']') else {
                return Err(ConfigError::ParseError {
                    line,
                    reason: format!("unterminated section header `{content}`"),
                });
            };
            let name = name.trim();
            let Some(&known) = SECTIONS.iter().find(|&&s| s == name) else {
                return Err(ConfigError::ParseError {
                    line,
                    reason: format!(
                        "unknown section `[{name}]` (expected [model], [grid], [solver], \
                         or [experiment])"
                    ),
                });
            };
            section = Some(known);
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::ParseError {
                line,
                reason: format!("expected `key = value` or a section header, got `{content}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(ConfigError::ParseError { line, reason: "empty key".into() });
        }
        if value.is_empty() {
            return Err(ConfigError::ParseError {
                line,
                reason: format!("empty value for key `{key}`"),
            });
        }
        let Some(section) = section else {
            return Err(ConfigError::ParseError {
                line,
                reason: format!("key `{key}` appears before any section header"),
            });
        };
        let qualified = format!("{section}.{key}");
        if entries.contains_key(&qualified) {
            return Err(ConfigError::ParseError {
                line,
                reason: format!("duplicate key `{key}` in section [{section}]"),
            });
        }
        entries.insert(qualified, Entry { value: value.to_string(), line, consumed: Cell::new(false) });
    }
    Ok(ExperimentConfig { entries })
}

impl ExperimentConfig {
    fn raw(&self, key: &str) -> Option<(&str, usize)> {
        self.entries.get(key).map(|e| {
            e.consumed.set(true);
            (e.value.as_str(), e.line)
        })
    }

    /// Optional finite float under `"section.key"`.
    pub fn get_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        let Some((value, line)) = self.raw(key) else { return Ok(None) };
        match value.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            _ => Err(ConfigError::ParseError {
                line,
                reason: format!("expected a finite number for `{key}`, got `{value}`"),
            }),
        }
    }

    /// Required finite float.
    pub fn require_f64(&self, key: &str) -> Result<f64, ConfigError> {
        self.get_f64(key)?.ok_or_else(|| ConfigError::MissingKey { key: key.to_string() })
    }

    /// Optional unsigned integer.
    pub fn get_usize(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        let Some((value, line)) = self.raw(key) else { return Ok(None) };
        value.parse::<usize>().map(Some).map_err(|_| ConfigError::ParseError {
            line,
            reason: format!("expected a nonnegative integer for `{key}`, got `{value}`"),
        })
    }

    /// Required unsigned integer.
    pub fn require_usize(&self, key: &str) -> Result<usize, ConfigError> {
        self.get_usize(key)?.ok_or_else(|| ConfigError::MissingKey { key: key.to_string() })
    }

    /// Optional boolean (`true`/`false`).
    pub fn get_bool(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        let Some((value, line)) = self.raw(key) else { return Ok(None) };
        match value {
            "true" => Ok(Some(true)),
            "false" => Ok(Some(false)),
            _ => Err(ConfigError::ParseError {
                line,
                reason: format!("expected `true` or `false` for `{key}`, got `{value}`"),
            }),
        }
    }

    /// Optional bare string (for enumerated choices such as a direction).
    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.raw(key).map(|(v, _)| v)
    }

    /// Required bare string.
    pub fn require_str(&self, key: &str) -> Result<&str, ConfigError> {
        self.get_str(key).ok_or_else(|| ConfigError::MissingKey { key: key.to_string() })
    }

    /// Rejects any key that no accessor consumed. Call after a subcommand has
    /// read everything it understands.
    pub fn finish(&self) -> Result<(), ConfigError> {
        for (key, entry) in &self.entries {
            if !entry.consumed.get() {
                return Err(ConfigError::UnknownKey { key: key.clone(), line: entry.line });
            }
        }
        Ok(())
    }
}
