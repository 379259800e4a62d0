//! Command surface of the `osg` binary: configs in, CSV and JSON out.

pub mod commands;
pub mod config;

use thiserror::Error;

pub use commands::{cmd_distinguishability, cmd_oracle_check, cmd_overlap, cmd_paths, cmd_probe, cmd_protocol};
pub use config::{CounterKind, RunConfig};

pub const OUTPUT_DIR_ENV: &str = "OSG_OUTPUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Simulation(osg_core::Error),
}

impl From<osg_core::Error> for CliError {
    fn from(e: osg_core::Error) -> Self {
        match e {
            osg_core::Error::Domain(m) | osg_core::Error::Contract(m) => CliError::Validation(m),
            other => CliError::Simulation(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) | CliError::Simulation(_) => 1,
        }
    }
}

/// Rendered result of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub text: String,
    /// File name used when only an output directory is known.
    pub default_name: &'static str,
    /// A check command found a value outside its tolerance.
    pub breach: bool,
}
