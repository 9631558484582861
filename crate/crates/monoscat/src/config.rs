//! Optional flat `key = value` configuration files.
//!
//! Every key names a long flag of the invoked subcommand (`hbar = 0.25` stands for
//! `--hbar 0.25`); `true`/`false` switch boolean flags. Flags given on the command line win
//! over the file.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::Path;

#[derive(Debug)]
pub enum ConfigError {
    Io { path: String, source: std::io::Error },
    Syntax { line: usize, text: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, source } => write!(f, "cannot read config file {path}: {source}"),
            ConfigError::Syntax { line, text } => write!(f, "config line {line}: expected `key = value`, got `{text}`"),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Syntax { line: i + 1, text: raw.to_string() });
        };
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key.starts_with('-') {
            return Err(ConfigError::Syntax { line: i + 1, text: raw.to_string() });
        }
        entries.push((key, value.trim().to_string()));
    }
    Ok(entries)
}

pub fn load(path: &Path) -> Result<Vec<(String, String)>, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse(&text)
}

/// Finds `--config PATH` or `--config=PATH` in `args`.
pub fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(OsString::from(rest));
        }
    }
    None
}

fn given(args: &[OsString], key: &str) -> bool {
    let flag = format!("--{key}");
    let with_value = format!("--{key}=");
    args.iter().any(|a| {
        let s = a.to_string_lossy();
        s == flag || s.starts_with(&with_value)
    })
}

/// Appends the file entries whose flags are absent from `args`.
pub fn merge(mut args: Vec<OsString>, entries: &[(String, String)]) -> Vec<OsString> {
    let original = args.clone();
    for (key, value) in entries {
        if key == "config" || given(&original, key) {
            continue;
        }
        match value.as_str() {
            "true" => args.push(format!("--{key}").into()),
            "false" => {}
            _ => args.push(format!("--{key}={value}").into()),
        }
    }
    args
}
