//! Flat `key=value` run configuration: schema defaults, then a config file,
//! then command-line flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

pub const OUTPUT_DIR_ENV: &str = "QOBS_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "qobs-output";

/// A recognised parameter and its default value.
#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    pub default: &'static str,
}

pub const fn key(name: &'static str, default: &'static str) -> Key {
    Key { name, default }
}

/// Reads a config file into ordered `(key, value)` pairs. Blank lines and
/// lines starting with `#` are skipped.
pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Validation(format!("config line {}: expected key=value, got {line:?}", lineno + 1))
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Fully resolved parameters of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    command: String,
    values: BTreeMap<String, String>,
}

impl Params {
    /// Defaults from `keys`, overridden by `file` entries, then by `flags`.
    /// Keys outside the schema are rejected.
    pub fn resolve(
        command: &str,
        keys: &[Key],
        file: &[(String, String)],
        flags: &[(&str, Option<String>)],
    ) -> Result<Self> {
        let mut values: BTreeMap<String, String> =
            keys.iter().map(|k| (k.name.to_string(), k.default.to_string())).collect();
        let mut seen = std::collections::BTreeSet::new();
        for (k, v) in file {
            if !values.contains_key(k) {
                return Err(CliError::Validation(format!("unknown key '{k}' for {command}")));
            }
            if !seen.insert(k.clone()) {
                return Err(CliError::Validation(format!("key '{k}' given twice in config file")));
            }
            values.insert(k.clone(), v.clone());
        }
        for (k, v) in flags {
            let Some(v) = v else { continue };
            if !values.contains_key(*k) {
                return Err(CliError::Validation(format!("unknown key '{k}' for {command}")));
            }
            values.insert(k.to_string(), v.clone());
        }
        Ok(Self {
            command: command.to_string(),
            values,
        })
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    /// Replaces an existing key. Unknown keys are a validation error.
    pub fn set(&mut self, key: &str, value: String) -> Result<()> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value;
                Ok(())
            }
            None => Err(CliError::Validation(format!("unknown key '{key}' for {}", self.command))),
        }
    }

    pub fn str(&self, key: &str) -> &str {
        self.values
            .get(key)
            .map(String::as_str)
            .unwrap_or_else(|| panic!("key '{key}' missing from schema"))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<T> {
        let raw = self.str(key);
        raw.parse()
            .map_err(|_| CliError::Validation(format!("{key}: expected {what}, got {raw:?}")))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let v: f64 = self.parse(key, "a number")?;
        if v.is_nan() {
            return Err(CliError::Validation(format!("{key}: NaN is not allowed")));
        }
        Ok(v)
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        self.parse(key, "a non-negative integer")
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        self.parse(key, "a non-negative integer")
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        self.parse(key, "true or false")
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let raw = self.str(key);
        let list = raw
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| !v.is_nan())
                    .ok_or_else(|| CliError::Validation(format!("{key}: not a number: {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if list.is_empty() {
            return Err(CliError::Validation(format!("{key}: empty list")));
        }
        Ok(list)
    }
}

/// `--out`, else `$QOBS_OUTPUT_DIR`, else `qobs-output`.
pub fn output_dir(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(DEFAULT_OUTPUT_DIR),
    }
}
