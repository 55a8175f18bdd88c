use std::path::Path;

use mmg_core::autotune::AutotuneError;
use mmg_core::domain::DomainError;
use mmg_core::env::EnvError;
use mmg_core::masac::MasacError;
use mmg_core::neural::NeuralError;

/// Failure of a command, carrying its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("{0}")]
    Divergence(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Other(_) => 1,
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Divergence(_) => 4,
        }
    }

    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Other(format!("{}: {e}", path.display()))
    }
}

impl From<DomainError> for CliError {
    fn from(e: DomainError) -> Self {
        match e {
            DomainError::Invalid(_) | DomainError::InvalidParams { .. } => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<MasacError> for CliError {
    fn from(e: MasacError) -> Self {
        match e {
            MasacError::Divergence { .. } | MasacError::NonFiniteLoss { .. } => CliError::Divergence(e.to_string()),
            MasacError::InvalidHyperparams(_) => CliError::Config(e.to_string()),
            MasacError::Env(EnvError::Domain(d)) => d.into(),
            MasacError::Checkpoint(_) | MasacError::Neural(NeuralError::Checkpoint(_)) | MasacError::Report(_) => {
                CliError::Data(e.to_string())
            }
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<EnvError> for CliError {
    fn from(e: EnvError) -> Self {
        match e {
            EnvError::Domain(d) => d.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<NeuralError> for CliError {
    fn from(e: NeuralError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<AutotuneError> for CliError {
    fn from(e: AutotuneError) -> Self {
        match e {
            AutotuneError::InvalidSpace(_) => CliError::Config(e.to_string()),
            AutotuneError::AllTrialsFailed { .. } => CliError::Divergence(e.to_string()),
            AutotuneError::Io(_) => CliError::Data(e.to_string()),
            other => CliError::Other(other.to_string()),
        }
    }
}
