//! Experiment drivers behind the `hoekf` binary.

pub mod config;
pub mod experiments;
pub mod svg;

/// Failures mapped onto the exit-code contract.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<hoekf_core::Error> for CliError {
    fn from(e: hoekf_core::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<svg::PlotError> for CliError {
    fn from(e: svg::PlotError) -> Self {
        CliError::Internal(e.to_string())
    }
}
