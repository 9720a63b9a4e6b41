//! Library side of the `scnlab` command-line harness, split out so the
//! integration tests can drive the commands in-process.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use commands::{cmd_bench, cmd_demo, cmd_estimate, cmd_predict, cmd_sweep, cmd_train};
pub use config::ExperimentConfig;
pub use error::CliError;
