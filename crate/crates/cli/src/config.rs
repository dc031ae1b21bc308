//! Strict flat key-value configuration with sections.
//!
//! Grammar: `[section]` headers, `key = value` lines, `#` full-line
//! comments, blank lines. Every key must be consumed by the command that
//! loads the file; leftovers are errors reported with their line numbers.
//! Duplicate keys within a section are errors.

use std::cell::Cell;
use std::fmt;

#[derive(Debug)]
pub enum ConfigError {
    Syntax { line: usize, message: String },
    Duplicate { line: usize, key: String },
    BadValue { line: usize, key: String, message: String },
    UnknownKeys(Vec<(usize, String)>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Syntax { line, message } => {
                write!(f, "config line {line}: {message}")
            }
            ConfigError::Duplicate { line, key } => {
                write!(f, "config line {line}: duplicate key `{key}`")
            }
            ConfigError::BadValue { line, key, message } => {
                write!(f, "config line {line}: invalid value for `{key}`: {message}")
            }
            ConfigError::UnknownKeys(keys) => {
                let list = keys
                    .iter()
                    .map(|(line, key)| format!("`{key}` (line {line})"))
                    .collect::<Vec<_>>()
                    .join(", ");
                write!(f, "config: unknown keys: {list}")
            }
        }
    }
}

impl std::error::Error for ConfigError {}

struct Entry {
    section: String,
    key: String,
    value: String,
    line: usize,
    used: Cell<bool>,
}

pub struct ConfigFile {
    entries: Vec<Entry>,
    raw: String,
}

impl ConfigFile {
    pub fn empty() -> ConfigFile {
        ConfigFile { entries: Vec::new(), raw: String::new() }
    }

    pub fn parse(text: &str) -> Result<ConfigFile, ConfigError> {
        let mut entries: Vec<Entry> = Vec::new();
        let mut section = String::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw_line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if let Some(name) = trimmed.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                    line,
                    message: "section header must look like [name]".into(),
                })?;
                section = name.trim().to_string();
                if section.is_empty() {
                    return Err(ConfigError::Syntax {
                        line,
                        message: "empty section name".into(),
                    });
                }
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: "expected `key = value`".into(),
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(ConfigError::Syntax { line, message: "empty key".into() });
            }
            if section.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("key `{key}` appears before any [section] header"),
                });
            }
            if entries.iter().any(|e| e.section == section && e.key == key) {
                return Err(ConfigError::Duplicate { line, key: format!("{section}.{key}") });
            }
            entries.push(Entry { section: section.clone(), key, value, line, used: Cell::new(false) });
        }
        Ok(ConfigFile { entries, raw: text.to_string() })
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    fn find(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.section == section && e.key == key)
    }

    pub fn get_str(&self, section: &str, key: &str) -> Option<String> {
        self.find(section, key).map(|e| {
            e.used.set(true);
            e.value.clone()
        })
    }

    fn parsed<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.find(section, key) {
            None => Ok(None),
            Some(e) => {
                e.used.set(true);
                e.value.parse::<T>().map(Some).map_err(|err| ConfigError::BadValue {
                    line: e.line,
                    key: format!("{section}.{key}"),
                    message: err.to_string(),
                })
            }
        }
    }

    pub fn get_f64(&self, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
        self.parsed(section, key)
    }

    pub fn get_usize(&self, section: &str, key: &str) -> Result<Option<usize>, ConfigError> {
        self.parsed(section, key)
    }

    pub fn get_u64(&self, section: &str, key: &str) -> Result<Option<u64>, ConfigError> {
        self.parsed(section, key)
    }

    pub fn get_bool(&self, section: &str, key: &str) -> Result<Option<bool>, ConfigError> {
        match self.find(section, key) {
            None => Ok(None),
            Some(e) => {
                e.used.set(true);
                match e.value.as_str() {
                    "true" | "yes" | "on" | "1" => Ok(Some(true)),
                    "false" | "no" | "off" | "0" => Ok(Some(false)),
                    other => Err(ConfigError::BadValue {
                        line: e.line,
                        key: format!("{section}.{key}"),
                        message: format!("expected a boolean, got `{other}`"),
                    }),
                }
            }
        }
    }

    /// Errors if any key was never consumed (unknown to the command).
    pub fn finish(&self) -> Result<(), ConfigError> {
        let leftover: Vec<(usize, String)> = self
            .entries
            .iter()
            .filter(|e| !e.used.get())
            .map(|e| (e.line, format!("{}.{}", e.section, e.key)))
            .collect();
        if leftover.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::UnknownKeys(leftover))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_values() {
        let cfg = ConfigFile::parse("# comment\n[grid]\nn = 256\nl = 50.0\n").unwrap();
        assert_eq!(cfg.get_usize("grid", "n").unwrap(), Some(256));
        assert_eq!(cfg.get_f64("grid", "l").unwrap(), Some(50.0));
        cfg.finish().unwrap();
    }

    #[test]
    fn unknown_keys_carry_line_numbers() {
        let cfg = ConfigFile::parse("[grid]\nn = 256\nmystery = 1\n").unwrap();
        let _ = cfg.get_usize("grid", "n").unwrap();
        match cfg.finish() {
            Err(ConfigError::UnknownKeys(keys)) => {
                assert_eq!(keys, vec![(3, "grid.mystery".to_string())]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_duplicates_and_bad_syntax() {
        assert!(matches!(
            ConfigFile::parse("[a]\nx = 1\nx = 2\n"),
            Err(ConfigError::Duplicate { line: 3, .. })
        ));
        assert!(matches!(
            ConfigFile::parse("x = 1\n"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            ConfigFile::parse("[a]\nnonsense\n"),
            Err(ConfigError::Syntax { line: 2, .. })
        ));
    }

    #[test]
    fn bad_values_name_the_key_and_line() {
        let cfg = ConfigFile::parse("[time]\ndt = abc\n").unwrap();
        match cfg.get_f64("time", "dt") {
            Err(ConfigError::BadValue { line: 2, key, .. }) => assert_eq!(key, "time.dt"),
            other => panic!("{other:?}"),
        }
    }
}
