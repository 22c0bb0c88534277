//! Experiment runner for `fedsubmax`: JSON configs, dataset readers, and
//! JSON-lines metrics.

pub mod config;
pub mod error;
pub mod experiment;
pub mod ingest;

pub use config::{load_config, ExperimentConfig};
pub use error::{CliError, Result};
pub use experiment::{run_brute, run_experiment, RunOptions, Summary};
