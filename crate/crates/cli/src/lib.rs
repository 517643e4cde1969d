//! Experiment harness: configuration, certification runs, sweeps,
//! empirical attack checks and the oracle battery.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;
pub mod summary;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
