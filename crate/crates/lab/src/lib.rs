//! Config-driven experiments on front speeds in shear flows.
//!
//! A run executes the enabled routes of an [`ExperimentConfig`], caches each
//! route's record, recomputes every check from the records and writes
//! `report.json`, `speeds.csv`, `gammastar.csv` and `timings.json`.

pub mod cache;
pub mod checks;
pub mod config;
pub mod output;
pub mod pipeline;
pub mod records;
pub mod routes;

pub use cache::Cache;
pub use checks::{fit_asymptote, verify_bounds, asymptotic_regime_checks, Check, Status};
pub use config::ExperimentConfig;
pub use pipeline::{execute, Outcome, Report, RunOptions, Stage, Timings};

/// Exit code for a config error.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for a failed check or a numerical failure.
pub const EXIT_FAILURE: i32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{location}: {message}")]
    Config { location: String, message: String },
    #[error("numerical failure: {0}")]
    Numerical(#[from] shearfront_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Report(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } => EXIT_CONFIG,
            _ => EXIT_FAILURE,
        }
    }
}
