use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::failure::usage;

/// Record of a data-producing run, sufficient to regenerate its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    pub tool_version: String,
    /// `-` stands for standard output.
    pub output_files: Vec<String>,
}

impl RunManifest {
    pub fn new<T: Serialize>(command: &str, parameters: &T, output_files: Vec<String>) -> Result<Self> {
        Ok(Self {
            command: command.to_string(),
            parameters: serde_json::to_value(parameters)?,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            output_files,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())).into())
    }
}
