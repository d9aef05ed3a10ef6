//! Per-epoch training log records, written as JSON lines.

use std::fs::OpenOptions;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::TrainError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Xe,
    Rl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub phase: Phase,
    /// Mean per-sample loss (cross-entropy) or mean policy surrogate loss.
    pub loss: f64,
    pub val_cider: f64,
    pub val_bleu1: f64,
    pub retrieval_fraction: f64,
    pub mean_sentences: f64,
    pub wallclock_s: f64,
}

/// Append epoch records to a JSONL file, one object per line.
pub fn append_logs(path: &Path, logs: &[EpochLog]) -> Result<(), TrainError> {
    let io_err = |source| TrainError::Io { path: path.display().to_string(), source };
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err)?;
    let mut w = BufWriter::new(file);
    for log in logs {
        let line = serde_json::to_string(log)
            .map_err(|e| TrainError::BadConfig(format!("log serialization failed: {e}")))?;
        writeln!(w, "{line}").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}
