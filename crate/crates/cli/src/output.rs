// SPDX-License-Identifier: Apache-2.0

//! Exit codes, error classification and atomic file output.

use std::io::Write;
use std::path::{Path, PathBuf};

use misconf::fault::FaultError;
use misconf::graph::GraphError;
use misconf::neuro::NeuroError;
use misconf::Error;
use sha2::{Digest, Sha256};

pub const EXIT_FAILURE: u8 = 1;
/// Infeasible parameters or missing input files.
pub const EXIT_USAGE: u8 = 2;
/// Training diverged.
pub const EXIT_DIVERGED: u8 = 3;
/// The specification check found no violation.
pub const EXIT_NO_ALARM: u8 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Missing(String),
    #[error("{0}")]
    Infeasible(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn missing(m: String) -> Self {
        CliError::Missing(m)
    }

    pub fn infeasible(m: String) -> Self {
        CliError::Infeasible(m)
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Missing(_) | CliError::Infeasible(_) => EXIT_USAGE,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}

fn graph_exit_code(e: &GraphError) -> u8 {
    match e {
        GraphError::InfeasibleParams(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

fn core_exit_code(e: &Error) -> u8 {
    match e {
        Error::Graph(g) | Error::Fault(FaultError::Graph(g)) => graph_exit_code(g),
        Error::Fault(FaultError::TooFewSamples(_)) => EXIT_USAGE,
        Error::Neuro(NeuroError::Diverged { .. } | NeuroError::NonFiniteLoss) => EXIT_DIVERGED,
        Error::Neuro(NeuroError::InvalidHyperparams(_)) => EXIT_USAGE,
        Error::Io(io) if io.kind() == std::io::ErrorKind::NotFound => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(Error::from)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(Error::from)?;
    tmp.write_all(bytes).map_err(Error::from)?;
    tmp.as_file().sync_all().map_err(Error::from)?;
    tmp.persist(path).map_err(|e| Error::from(e.error))?;
    Ok(())
}

/// Write `text` to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// `data.jsonl` → `data.manifest.json`.
pub fn manifest_path(data: &Path) -> PathBuf {
    let stem = data.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "dataset".into());
    data.with_file_name(format!("{stem}.manifest.json"))
}
