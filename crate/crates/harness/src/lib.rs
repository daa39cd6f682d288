//! Experiment runner for morphopt: configuration, CSV artifacts, integrity
//! checks and plot data.

pub mod config;
pub mod csvout;
pub mod error;
pub mod integrity;
pub mod metadata;
pub mod report;
pub mod runner;
pub mod stats;
pub mod svg;

pub use config::{ExperimentConfig, Overrides, TaskKind};
pub use error::{HarnessError, Result};
pub use runner::{execute, run_all, BaselineChoice, Command, Heuristic};
