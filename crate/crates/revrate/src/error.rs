use std::path::Path;

use thiserror::Error;

use revrate_core::classifiers::ClassifierError;
use revrate_core::dcnn::DcnnError;
use revrate_core::pipeline::PipelineError;

/// Errors surfaced by commands, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unknown model kinds, invalid settings (exit 1).
    #[error("usage: {0}")]
    Usage(String),
    /// Input files that do not parse or violate the data contract (exit 2).
    #[error("data: {0}")]
    Data(String),
    /// Anything else, e.g. an output that cannot be written (exit 3).
    #[error("internal: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    pub fn read(path: &Path, err: std::io::Error) -> Self {
        CliError::Data(format!("cannot read {}: {err}", path.display()))
    }

    pub fn write(path: &Path, err: std::io::Error) -> Self {
        CliError::Internal(format!("cannot write {}: {err}", path.display()))
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match &e {
            PipelineError::UnknownKind(_) | PipelineError::MissingEmbeddings => CliError::Usage(e.to_string()),
            PipelineError::Classifier(ClassifierError::BadConfig(_) | ClassifierError::UnknownAlgorithm(_)) => {
                CliError::Usage(e.to_string())
            }
            PipelineError::Dcnn(DcnnError::BadConfig(_)) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<DcnnError> for CliError {
    fn from(e: DcnnError) -> Self {
        PipelineError::from(e).into()
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
