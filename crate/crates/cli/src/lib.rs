//! Batch scenario runner for the EIT cooling model.
//!
//! A run reads one configuration file (see [`config`]), evaluates the
//! scenario, writes CSV tables into the output directory and finishes with a
//! `manifest.json` describing what was produced.

pub mod config;
pub mod manifest;
pub mod scenarios;

use std::path::PathBuf;

pub use config::{ConfigError, ScenarioConfig, ScenarioKind};
pub use manifest::RunManifest;
pub use scenarios::{run, RunOptions};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("solver: {0}")]
    Solver(#[from] eitcool::Error),
    #[error("i/o on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

/// Read and parse a configuration file.
pub fn load_config(path: &std::path::Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(ScenarioConfig::parse(&text)?)
}
