use std::path::PathBuf;

use ccds_core::analytics::AnalyticsError;
use ccds_core::contracts::ContractError;
use ccds_core::market::MarketError;
use ccds_core::{CloseoutError, ValidationError};
use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid field `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{failed} of {n} scenarios violate invariants; minimal counterexample written to {counterexample}")]
    Invariant { n: u64, failed: u64, counterexample: PathBuf },
    #[error("{0}")]
    Engine(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } | CliError::Parse { .. } | CliError::Engine(_) => EXIT_VALIDATION,
            CliError::Io { .. } => EXIT_IO,
            CliError::Invariant { .. } => EXIT_INVARIANT,
        }
    }

    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Validation { field: field.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<ValidationError> for CliError {
    fn from(e: ValidationError) -> Self {
        CliError::validation(e.field(), e.to_string())
    }
}

impl From<ContractError> for CliError {
    fn from(e: ContractError) -> Self {
        match e {
            ContractError::Validation(v) => v.into(),
            other => CliError::Engine(other.to_string()),
        }
    }
}

impl From<MarketError> for CliError {
    fn from(e: MarketError) -> Self {
        match e {
            MarketError::Validation(v) => v.into(),
            MarketError::NegativeTime(t) => CliError::validation("tau", format!("negative time {t}")),
            other => CliError::Engine(other.to_string()),
        }
    }
}

impl From<CloseoutError> for CliError {
    fn from(e: CloseoutError) -> Self {
        match e {
            CloseoutError::Contract(c) => c.into(),
            CloseoutError::Market(m) => m.into(),
            other => CliError::Engine(other.to_string()),
        }
    }
}

impl From<AnalyticsError> for CliError {
    fn from(e: AnalyticsError) -> Self {
        match e {
            AnalyticsError::Closeout(c) => c.into(),
            AnalyticsError::Market(m) => m.into(),
            AnalyticsError::HorizonBeyondMaturity { horizon, maturity } => {
                CliError::validation("mc.horizon", format!("horizon {horizon} exceeds swap maturity {maturity}"))
            }
            other => CliError::Engine(other.to_string()),
        }
    }
}
