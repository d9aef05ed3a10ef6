//! Dataset, vocabulary, and template-database file I/O.
//!
//! Samples live in JSONL (one object per line); vocabularies and template
//! databases are single pretty-printed JSON documents.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::corpus::sample::ReportSample;
use crate::corpus::templates::TemplateDatabase;
use crate::corpus::vocab::Vocabulary;
use crate::error::CorpusError;

fn io_err(path: &Path, source: std::io::Error) -> CorpusError {
    CorpusError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn save_samples_jsonl(path: &Path, samples: &[ReportSample]) -> Result<(), CorpusError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut out = BufWriter::new(file);
    for sample in samples {
        let line = serde_json::to_string(sample).expect("sample serialization is infallible");
        writeln!(out, "{line}").map_err(|e| io_err(path, e))?;
    }
    out.flush().map_err(|e| io_err(path, e))
}

pub fn load_samples_jsonl(path: &Path) -> Result<Vec<ReportSample>, CorpusError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut samples = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let sample: ReportSample =
            serde_json::from_str(&line).map_err(|e| CorpusError::MalformedLine {
                path: path.display().to_string(),
                line: lineno + 1,
                source: e,
            })?;
        samples.push(sample);
    }
    Ok(samples)
}

fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CorpusError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CorpusError::MalformedLine {
        path: path.display().to_string(),
        line: 0,
        source: e,
    })?;
    out.write_all(b"\n").map_err(|e| io_err(path, e))?;
    out.flush().map_err(|e| io_err(path, e))
}

fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, CorpusError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| CorpusError::MalformedLine {
        path: path.display().to_string(),
        line: e.line(),
        source: e,
    })
}

pub fn save_vocab(path: &Path, vocab: &Vocabulary) -> Result<(), CorpusError> {
    save_json(path, vocab)
}

pub fn load_vocab(path: &Path) -> Result<Vocabulary, CorpusError> {
    load_json(path)
}

pub fn save_templates(path: &Path, db: &TemplateDatabase) -> Result<(), CorpusError> {
    save_json(path, db)
}

pub fn load_templates(path: &Path) -> Result<TemplateDatabase, CorpusError> {
    load_json(path)
}
