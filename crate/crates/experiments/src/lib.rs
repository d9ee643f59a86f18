//! Configuration, experiment drivers and reproducible CSV output.

pub mod config;
pub mod experiments;
pub mod output;
pub mod runner;

pub use config::{validate_config, Config, ConfigError, ExperimentId, Validated};
pub use output::{verify, FileCheck, RunManifest, Table};
pub use runner::{compute_tables, run_experiment, RunError, RunRequest};
