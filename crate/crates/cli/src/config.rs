//! `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Values given on the
//! command line win over the file, and the file wins over built-in defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{usage, AppResult};

pub const OUT_DIR_ENV: &str = "PARAMRAY_OUT_DIR";

#[derive(Debug, Default, Clone)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> AppResult<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {}: expected key = value", i + 1)))?;
            let key = k.trim().replace('-', "_");
            if key.is_empty() {
                return Err(usage(format!("config line {}: empty key", i + 1)));
            }
            values.insert(key, v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: Option<&Path>) -> AppResult<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
                Self::parse(&text)
            }
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> AppResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|e| usage(format!("config key {key} = {v}: {e}"))),
        }
    }

    /// Flag, then config, then default.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> AppResult<T>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }

    /// Output directory: flag, config `out_dir`, the environment variable, `.`.
    pub fn out_dir(&self, flag: Option<PathBuf>) -> AppResult<PathBuf> {
        if let Some(p) = flag {
            return Ok(p);
        }
        if let Some(p) = self.get::<PathBuf>("out_dir")? {
            return Ok(p);
        }
        Ok(std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".")))
    }
}
