//! Parameter sweeps of fading-channel key rates, written as CSV or JSON tables.

use std::path::PathBuf;

use thiserror::Error;

pub mod config;
pub mod output;
pub mod sweep;

pub use config::{MuRange, MuSetting, OutputFormat, Protocol, SweepArgs, SweepConfig};
pub use output::{emit, render, CSV_HEADER};
pub use sweep::run_sweep;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration for '{field}': {message}")]
    Config { field: String, message: String },
    #[error("numerical failure at {x_db} dB: {source}")]
    Numeric {
        x_db: f64,
        #[source]
        source: cvqkd_fading::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// Process exit status: 2 for configuration errors, 3 for numerical
    /// failures, 1 for I/O errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Numeric { .. } => 3,
            CliError::Io { .. } => 1,
        }
    }
}

/// Resolves the configuration, runs the sweep and writes the table.
pub fn run(protocol: Protocol, args: SweepArgs) -> Result<(), CliError> {
    let config = SweepConfig::resolve(protocol, args)?;
    let table = run_sweep(&config)?;
    emit(&table, config.format, config.output.as_deref())
}
