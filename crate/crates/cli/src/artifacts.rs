//! Fixed file layout inside a run directory and shared load/save helpers.
//!
//! Every subcommand reads and writes well-known names under `--out`, so a
//! full pipeline chains through one directory:
//!
//! ```text
//! out/
//!   config.json        resolved configuration echo (every command)
//!   train.jsonl        dataset splits            (gen-data)
//!   val.jsonl
//!   test.jsonl
//!   templates.json     mined template database   (mine-templates)
//!   vocab.json         token vocabulary          (mine-templates)
//!   xe.ckpt            best cross-entropy model  (train)
//!   best.ckpt          best overall model        (train)
//!   train_log.jsonl    per-epoch diagnostics     (train)
//!   metrics.json       evaluation scores         (evaluate)
//!   metrics_raw.json   scores before postprocess (evaluate, if enabled)
//!   predictions.jsonl  per-sample decoded output (evaluate)
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use hrgr_core::corpus::{
    load_samples_jsonl, load_templates, load_vocab, ReportSample, TemplateDatabase, Vocabulary,
};

use crate::errors::AppError;

#[derive(Debug, Clone)]
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn new(root: &Path) -> Result<Self, AppError> {
        fs::create_dir_all(root).map_err(|e| {
            AppError::data(format!("cannot create output directory {}: {e}", root.display()))
        })?;
        Ok(OutDir { root: root.to_path_buf() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn split_file(&self, split: &str) -> PathBuf {
        self.root.join(format!("{split}.jsonl"))
    }

    pub fn templates(&self) -> PathBuf {
        self.root.join("templates.json")
    }

    pub fn vocab(&self) -> PathBuf {
        self.root.join("vocab.json")
    }

    pub fn checkpoint(&self, name: &str) -> PathBuf {
        self.root.join(format!("{name}.ckpt"))
    }

    pub fn train_log(&self) -> PathBuf {
        self.root.join("train_log.jsonl")
    }

    pub fn metrics(&self) -> PathBuf {
        self.root.join("metrics.json")
    }

    pub fn metrics_raw(&self) -> PathBuf {
        self.root.join("metrics_raw.json")
    }

    pub fn predictions(&self) -> PathBuf {
        self.root.join("predictions.jsonl")
    }

    /// Refuse to clobber existing outputs unless `--force` was given.
    pub fn refuse_overwrite(&self, outputs: &[PathBuf], force: bool) -> Result<(), AppError> {
        if force {
            return Ok(());
        }
        let existing: Vec<String> = outputs
            .iter()
            .filter(|p| p.exists())
            .map(|p| p.display().to_string())
            .collect();
        if existing.is_empty() {
            Ok(())
        } else {
            Err(AppError::data(format!(
                "refusing to overwrite {}; pass --force to replace",
                existing.join(", ")
            )))
        }
    }

    pub fn load_split(&self, split: &str) -> Result<Vec<ReportSample>, AppError> {
        let path = self.split_file(split);
        if !path.exists() {
            return Err(AppError::data(format!(
                "{} not found; run gen-data first",
                path.display()
            )));
        }
        Ok(load_samples_jsonl(&path)?)
    }

    pub fn load_templates(&self) -> Result<TemplateDatabase, AppError> {
        let path = self.templates();
        if !path.exists() {
            return Err(AppError::data(format!(
                "{} not found; run mine-templates first",
                path.display()
            )));
        }
        Ok(load_templates(&path)?)
    }

    pub fn load_vocab(&self) -> Result<Vocabulary, AppError> {
        let path = self.vocab();
        if !path.exists() {
            return Err(AppError::data(format!(
                "{} not found; run mine-templates first",
                path.display()
            )));
        }
        Ok(load_vocab(&path)?)
    }
}

/// Serialize a value as pretty JSON with a trailing newline.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), AppError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| AppError::data(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text)
        .map_err(|e| AppError::data(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overwrite_refusal_names_the_file_and_force_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let out = OutDir::new(dir.path()).unwrap();
        let path = out.split_file("train");
        fs::write(&path, "x").unwrap();

        let err = out.refuse_overwrite(&[path.clone()], false).unwrap_err();
        assert!(err.to_string().contains("train.jsonl"));
        assert!(err.to_string().contains("--force"));
        out.refuse_overwrite(&[path], true).unwrap();
    }

    #[test]
    fn missing_inputs_point_at_the_producing_command() {
        let dir = tempfile::tempdir().unwrap();
        let out = OutDir::new(dir.path()).unwrap();
        let err = out.load_split("train").unwrap_err();
        assert!(err.to_string().contains("gen-data"));
        let err = out.load_templates().unwrap_err();
        assert!(err.to_string().contains("mine-templates"));
    }
}
