//! Experiment plumbing: flat TOML configs with environment and CLI
//! overrides, seeded evaluation and sweeps, CSV results, paired comparisons
//! and sign tests.

pub mod compare;
pub mod config;
pub mod error;
pub mod experiment;
pub mod stats;

pub use config::{load_config, ExperimentConfig, PolicySpec, SweepAxis};
pub use error::{Error, Result};
pub use experiment::{run, EpisodeRow, RunOptions};
