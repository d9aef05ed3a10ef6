//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by the numerics layer (arrays, tape, optimizers).
#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("shape mismatch in {op}: {details}")]
    ShapeMismatch { op: &'static str, details: String },

    #[error("array data length {len} does not match shape {shape:?}")]
    BadArrayLength { shape: Vec<usize>, len: usize },

    #[error("backward requires a scalar loss node, got shape {shape:?}")]
    NonScalarLoss { shape: Vec<usize> },

    #[error("non-finite gradient for parameter '{param}'")]
    NonFiniteGradient { param: String },

    #[error("non-finite loss: {context}")]
    NonFiniteLoss { context: String },

    #[error("gradient shape {grad:?} does not match parameter '{param}' shape {param_shape:?}")]
    GradShapeMismatch {
        param: String,
        param_shape: Vec<usize>,
        grad: Vec<usize>,
    },

    #[error("unknown parameter '{0}'")]
    UnknownParam(String),
}

/// Errors raised by corpus construction and dataset I/O.
#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot build a vocabulary from an empty corpus")]
    EmptyCorpus,

    #[error("malformed line {line} in {path}: {source}")]
    MalformedLine {
        path: String,
        line: usize,
        source: serde_json::Error,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("template mining with threshold {threshold} kept no candidates ({n_docs} documents); lower the threshold")]
    NoTemplates { threshold: usize, n_docs: usize },

    #[error("invalid configuration: {0}")]
    BadConfig(String),
}

/// Errors raised by model construction and checkpoint I/O.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("bad checkpoint: {0}")]
    BadCheckpoint(String),

    #[error("checkpoint dims {checkpoint} do not match expected dims {expected}")]
    DimMismatch { checkpoint: String, expected: String },

    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Errors raised during training and evaluation.
#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error("invalid training configuration: {0}")]
    BadConfig(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}
