//! Process-level error classification.
//!
//! Every failure is bucketed into one of three exit codes so scripts can
//! distinguish "fix your config" (2) from "fix your files" (3) from
//! "the math blew up" (4).

use std::fmt;
use std::process::ExitCode;

use hrgr_core::error::{CorpusError, ModelError, NumericsError, TrainError};

#[derive(Debug)]
pub enum AppError {
    /// Invalid configuration or flags; exit code 2.
    Config(String),
    /// Missing or malformed input/output files; exit code 3.
    Data(String),
    /// Non-finite losses, shape faults, and other numeric failures; exit
    /// code 4.
    Numeric(String),
}

impl AppError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            AppError::Config(_) => ExitCode::from(2),
            AppError::Data(_) => ExitCode::from(3),
            AppError::Numeric(_) => ExitCode::from(4),
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        AppError::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        AppError::Data(msg.into())
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Config(msg) => write!(f, "configuration error: {msg}"),
            AppError::Data(msg) => write!(f, "data error: {msg}"),
            AppError::Numeric(msg) => write!(f, "numeric error: {msg}"),
        }
    }
}

impl From<CorpusError> for AppError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::BadConfig(_) => AppError::Config(e.to_string()),
            CorpusError::EmptyCorpus
            | CorpusError::MalformedLine { .. }
            | CorpusError::Io { .. }
            | CorpusError::NoTemplates { .. } => AppError::Data(e.to_string()),
        }
    }
}

impl From<NumericsError> for AppError {
    fn from(e: NumericsError) -> Self {
        AppError::Numeric(e.to_string())
    }
}

impl From<ModelError> for AppError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Io { .. }
            | ModelError::BadCheckpoint(_)
            | ModelError::DimMismatch { .. } => AppError::Data(e.to_string()),
            ModelError::Numerics(inner) => inner.into(),
        }
    }
}

impl From<TrainError> for AppError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::BadConfig(_) => AppError::Config(e.to_string()),
            TrainError::Io { .. } => AppError::Data(e.to_string()),
            TrainError::Numerics(inner) => inner.into(),
            TrainError::Model(inner) => inner.into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_errors_split_between_config_and_data() {
        let cfg: AppError = CorpusError::BadConfig("bad ratio".into()).into();
        assert!(matches!(cfg, AppError::Config(_)));
        let data: AppError = CorpusError::NoTemplates { threshold: 10, n_docs: 5 }.into();
        assert!(matches!(data, AppError::Data(_)));
        assert!(data.to_string().contains("lower the threshold"));
    }

    #[test]
    fn nested_train_errors_keep_their_class() {
        let numeric: AppError = TrainError::Numerics(NumericsError::NonFiniteLoss {
            context: "epoch 3".into(),
        })
        .into();
        assert!(matches!(numeric, AppError::Numeric(_)));

        let data: AppError = TrainError::Model(ModelError::BadCheckpoint("short".into())).into();
        assert!(matches!(data, AppError::Data(_)));
    }
}
