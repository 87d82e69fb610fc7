use phz_core::io::GridFileError;
use phz_pudip::PudipError;
use thiserror::Error;

/// Failure of one command, carrying the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<phz_core::Error> for CliError {
    fn from(e: phz_core::Error) -> Self {
        match e {
            phz_core::Error::InvalidParameter(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<GridFileError> for CliError {
    fn from(e: GridFileError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<PudipError> for CliError {
    fn from(e: PudipError) -> Self {
        match e {
            PudipError::Core(inner) => inner.into(),
            PudipError::Config(_) => CliError::Usage(e.to_string()),
            PudipError::SparseBackground { .. } => CliError::Data(e.to_string()),
            PudipError::NonFiniteLoss { .. } | PudipError::Nn(_) => CliError::Numerical(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
