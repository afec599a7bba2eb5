//! Scenario runner for the `mimo-downlink` library: JSON scenarios, Monte
//! Carlo sweeps with common random numbers, figure presets, analytic
//! bound evaluation and CSV export.

pub mod analytic;
pub mod output;
pub mod presets;
pub mod runner;
pub mod scenario;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    Core(#[from] mimo_downlink::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// Process exit code: 2 for configuration problems, 3 for numeric or
    /// resource failures during a run, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Core(_) => 3,
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}
