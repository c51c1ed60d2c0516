// SPDX-License-Identifier: Apache-2.0

//! Command-line pipeline over the `urbanmesh` library: ingestion, windowing,
//! analyses and deterministic file output.
//!
//! Exit codes: 0 success, 1 analysis error, 2 input or configuration error,
//! 3 unsupported bundle version.

pub mod args;
pub mod bundle;
mod commands;
pub mod output;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use args::Cli;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Analysis(String),
    #[error("{path}: bundle format version {found:?} is not supported (expected {expected})")]
    Version { path: String, found: Option<u64>, expected: u32 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Analysis(_) => 1,
            CliError::Input(_) => 2,
            CliError::Version { .. } => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Analysis(_) => "analysis",
            CliError::Input(_) => "input",
            CliError::Version { .. } => "format_version",
        }
    }

    /// One-line JSON object for standard error.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": { "kind": self.kind(), "exit_code": self.exit_code(), "message": self.to_string() } }).to_string()
    }
}

pub(crate) fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// What a finished command produced.
#[derive(Debug, Default)]
pub struct RunReport {
    pub stdout: Vec<String>,
    pub warnings: Vec<String>,
    pub written: Vec<PathBuf>,
}

/// Runs one parsed command line. Nothing is written unless every input
/// parsed and every analysis succeeded.
pub fn run(cli: &Cli) -> Result<RunReport, CliError> {
    commands::run(&cli.command)
}
