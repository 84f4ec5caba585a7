//! Batch command-line interface for Gaussian location-scale boosting:
//! fit models on CSV data, tune the stopping iteration by cross-validation,
//! and run reproducible simulation studies. All outputs are plain CSV files
//! meant to be diffed, plotted or post-processed elsewhere.

pub mod commands;
pub mod config;
pub mod io;

use std::fmt;

/// CLI failure with its process exit code: 1 usage/config, 2 data, 3 numeric.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Data(msg) => write!(f, "data error: {msg}"),
            CliError::Numeric(msg) => write!(f, "numeric error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<gamlss_boost::Error> for CliError {
    fn from(e: gamlss_boost::Error) -> Self {
        use gamlss_boost::Error::*;
        match &e {
            Usage(_) => CliError::Usage(e.to_string()),
            DimensionMismatch { .. } | DegenerateData(_) => CliError::Data(e.to_string()),
            NonFinite { .. } | NonFiniteAt { .. } | DegenerateLearner => {
                CliError::Numeric(e.to_string())
            }
            Engine { source, .. } => {
                let inner = CliError::from((**source).clone());
                match inner {
                    CliError::Usage(_) => CliError::Usage(e.to_string()),
                    CliError::Data(_) => CliError::Data(e.to_string()),
                    CliError::Numeric(_) => CliError::Numeric(e.to_string()),
                }
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
