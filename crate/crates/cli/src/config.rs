//! The single run configuration shared by every subcommand.
//!
//! One JSON file describes the whole pipeline: corpus synthesis, split
//! ratios, template mining, model width, and the training schedule. Every
//! command echoes its resolved configuration next to its outputs so a run
//! directory is self-describing and reruns are reproducible.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use hrgr_core::corpus::SynthConfig;
use hrgr_core::model::{fnv1a64, Dims};
use hrgr_core::training::TrainConfig;

use crate::errors::AppError;

/// Fractions of the corpus assigned to each split. Must sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios { train: 0.7, val: 0.1, test: 0.2 }
    }
}

impl SplitRatios {
    /// Deterministic split sizes: train and val round down, test takes the
    /// remainder.
    pub fn counts(&self, n: usize) -> (usize, usize, usize) {
        let n_train = (n as f64 * self.train).floor() as usize;
        let n_val = (n as f64 * self.val).floor() as usize;
        (n_train, n_val, n - n_train - n_val)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub synth: SynthConfig,
    pub split: SplitRatios,
    /// Mining threshold as a fraction of training documents; a sentence
    /// must appear in at least ceil(fraction * n_docs) documents.
    pub template_df_fraction: f64,
    pub vocab_min_freq: usize,
    pub d_hidden: usize,
    pub d_embed: usize,
    pub train: TrainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            synth: SynthConfig::default(),
            split: SplitRatios::default(),
            template_df_fraction: 0.01,
            vocab_min_freq: 3,
            d_hidden: 64,
            d_embed: 64,
            train: TrainConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), AppError> {
        self.synth.validate()?;
        self.train.validate()?;
        let s = &self.split;
        for (name, v) in [("train", s.train), ("val", s.val), ("test", s.test)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(AppError::config(format!(
                    "split.{name} = {v} must lie in [0, 1]"
                )));
            }
        }
        let sum = s.train + s.val + s.test;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(AppError::config(format!(
                "split ratios must sum to 1, got {sum}"
            )));
        }
        if !(self.template_df_fraction > 0.0 && self.template_df_fraction <= 1.0) {
            return Err(AppError::config(format!(
                "template_df_fraction = {} must lie in (0, 1]",
                self.template_df_fraction
            )));
        }
        if self.vocab_min_freq == 0 {
            return Err(AppError::config("vocab_min_freq must be at least 1"));
        }
        if self.d_hidden == 0 || self.d_embed == 0 {
            return Err(AppError::config("d_hidden and d_embed must be positive"));
        }
        Ok(())
    }

    /// Document-frequency threshold for a training split of `n_docs`.
    pub fn df_threshold(&self, n_docs: usize) -> usize {
        ((n_docs as f64 * self.template_df_fraction).ceil() as usize).max(1)
    }

    /// Model dimensions once the data-dependent sizes are known.
    pub fn dims(&self, vocab_size: usize, n_templates: usize) -> Dims {
        Dims {
            d_hidden: self.d_hidden,
            d_embed: self.d_embed,
            regions: self.synth.regions,
            d_feat: self.synth.feat_dim,
            vocab_size,
            n_templates,
        }
    }

    /// Stable hash of the resolved configuration, recorded in checkpoints.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serialization is infallible");
        format!("{:016x}", fnv1a64(canonical.as_bytes()))
    }
}

/// Load a config file, or fall back to defaults when no path is given.
/// Unknown keys and malformed JSON are configuration errors.
pub fn load_config(path: Option<&Path>) -> Result<RunConfig, AppError> {
    let config = match path {
        None => RunConfig::default(),
        Some(p) => {
            let file = File::open(p).map_err(|e| {
                AppError::config(format!("cannot open config {}: {e}", p.display()))
            })?;
            serde_json::from_reader(BufReader::new(file)).map_err(|e| {
                AppError::config(format!("cannot parse config {}: {e}", p.display()))
            })?
        }
    };
    config.validate()?;
    Ok(config)
}

/// Write the resolved config next to the run's outputs.
pub fn echo_config(out_dir: &Path, config: &RunConfig) -> Result<(), AppError> {
    let path = out_dir.join("config.json");
    let file = File::create(&path)
        .map_err(|e| AppError::data(format!("cannot write {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, config)
        .map_err(|e| AppError::data(format!("cannot write {}: {e}", path.display())))?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| AppError::data(format!("cannot write {}: {e}", path.display())))
}
