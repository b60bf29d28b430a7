use thiserror::Error;
use wpr_secrecy::algorithms::AlgorithmError;
use wpr_secrecy::sim::SimError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("solver: {0}")]
    Solver(String),
}

impl CliError {
    pub const USAGE: u8 = 64;

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Usage(_) => Self::USAGE,
        }
    }

    pub fn io(context: impl std::fmt::Display, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{context}: {err}"))
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidConfig { .. } => CliError::Usage(e.to_string()),
            SimError::Algorithm(a) => a.into(),
        }
    }
}

impl From<AlgorithmError> for CliError {
    fn from(e: AlgorithmError) -> Self {
        CliError::Solver(e.to_string())
    }
}
