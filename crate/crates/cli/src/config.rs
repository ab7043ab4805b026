//! JSON config files and flag overrides.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;

use qbayes::operator::DEFAULT_COMPOSITE_CAP;

use crate::output::Failure;

pub const CAP_VAR: &str = "QBAYES_COMPOSITE_CAP";

/// Reads `path` as `T`; serde reports line and column on failure.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Failure::new(format!("{}: {e}", path.display())))
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(format!("{}: {e}", path.display())))
}

/// Loads the command's config section, or its default when no file is given.
/// Relative paths inside the file are resolved against its directory.
pub fn load<T: DeserializeOwned + Default + Relocate>(path: Option<&Path>) -> Result<T, Failure> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let mut cfg: T = read_json(path)?;
    if let Some(dir) = path.parent() {
        cfg.relocate(dir);
    }
    Ok(cfg)
}

pub trait Relocate {
    fn relocate(&mut self, base: &Path);
}

pub fn rebase(p: &mut Option<PathBuf>, base: &Path) {
    if let Some(inner) = p {
        if inner.is_relative() {
            *inner = base.join(&*inner);
        }
    }
}

/// Flag value if given, else config value.
pub fn pick<T>(flag: Option<T>, cfg: Option<T>) -> Option<T> {
    flag.or(cfg)
}

pub fn require_seed(flag: Option<u64>, cfg: Option<u64>) -> Result<u64, Failure> {
    pick(flag, cfg).ok_or_else(|| Failure::new("this command is stochastic: pass --seed or set \"seed\" in the config"))
}

pub fn composite_cap() -> Result<usize, Failure> {
    match std::env::var(CAP_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::new(format!("{CAP_VAR}={v:?} is not a non-negative integer"))),
        Err(_) => Ok(DEFAULT_COMPOSITE_CAP),
    }
}

/// clap value parser for kebab-case serde enums.
pub fn kebab<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(|e| e.to_string())
}
