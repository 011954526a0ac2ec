use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

/// Record of one CLI invocation, written once to `<out>/<subcommand>_run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// The config after command-line overrides.
    pub config: serde_json::Value,
    /// Cache keys of every sweep run, in order (model hash for `spectrum`).
    pub spec_hashes: Vec<String>,
    pub outputs: Vec<PathBuf>,
    pub wall_seconds: f64,
    pub tool_version: String,
    /// Subcommand-specific results such as transition points or KS distances.
    pub details: serde_json::Value,
}

impl RunManifest {
    pub fn path(out: &Path, subcommand: &str) -> PathBuf {
        out.join(format!("{}_run.json", subcommand.replace('-', "_")))
    }

    pub fn write(&self, out: &Path) -> Result<PathBuf> {
        let path = Self::path(out, &self.subcommand);
        std::fs::write(&path, serde_json::to_vec_pretty(self)?)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
