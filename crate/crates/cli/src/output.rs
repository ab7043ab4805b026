use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

/// Usage or input error; exits with status 1.
#[derive(Debug)]
pub struct Failure(String);

impl Failure {
    pub fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<qbayes::Error> for Failure {
    fn from(e: qbayes::Error) -> Self {
        Self(e.to_string())
    }
}

pub struct OutDir(PathBuf);

impl OutDir {
    pub fn create(dir: Option<PathBuf>) -> Result<Self, Failure> {
        let dir = dir.unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&dir).map_err(|e| Failure::new(format!("{}: {e}", dir.display())))?;
        Ok(Self(dir))
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf, Failure> {
        let path = self.path(name);
        fs::write(&path, contents).map_err(|e| Failure::new(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, Failure> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::new(e.to_string()))?;
        text.push('\n');
        self.write(name, &text)
    }
}

pub fn show(path: &Path) -> String {
    path.display().to_string()
}

/// Empty for `None`, shortest round-trip decimal otherwise.
pub fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}
