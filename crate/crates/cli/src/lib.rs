//! Experiment driver behind the `sbda` binary.
//!
//! Every command returns `anyhow::Result`; errors wrapping [`UsageError`]
//! map to exit status 1, every other failure to 2.

pub mod args;
pub mod compare;
pub mod config;
pub mod dump;
pub mod files;
pub mod metrics;
pub mod run;

use std::fmt;

pub use config::{ConfigFile, ExperimentConfig, Overrides, SolverKind, TimeBudget};
pub use run::{cmd_run, Manifest, RunSummary};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

/// Invalid command-line or configuration input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Exit status for a failed command.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.chain().any(|e| e.is::<UsageError>()) {
        EXIT_USAGE
    } else {
        EXIT_DATA
    }
}
