//! Flat key=value config files.
//!
//! One `key = value` pair per line, `#` starts a comment. Keys mirror the
//! long flag names (for example `snr-min = 2.0`). Precedence everywhere is
//! command-line flag, then config file, then built-in default.

use ampgnn::{Error, Result};
use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Default, Clone)]
pub struct CfgFile {
    values: HashMap<String, String>,
}

impl CfgFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Usage(format!(
                    "config line {}: expected key = value, got '{raw}'",
                    lineno + 1
                )));
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(CfgFile { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    /// Parsed value under `key`, if present.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::Usage(format!("config key '{key}': cannot parse '{raw}'"))),
        }
    }

    /// flag > config > default.
    pub fn resolve<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }

    /// flag > config, no default.
    pub fn resolve_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}

/// Comma-separated list of user counts ("8,16").
pub fn parse_user_list(raw: &str) -> Result<Vec<usize>> {
    let list: std::result::Result<Vec<usize>, _> =
        raw.split(',').map(|p| p.trim().parse::<usize>()).collect();
    let list = list.map_err(|_| Error::Usage(format!("cannot parse user list '{raw}'")))?;
    if list.is_empty() {
        return Err(Error::Usage("user list is empty".into()));
    }
    Ok(list)
}
