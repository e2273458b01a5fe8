//! Experiment runner for the `qwgan` simulator.
//!
//! Each experiment is a TOML config (see [`config`]) naming one command.
//! [`runner::run`] executes it and writes per-seed CSV histories, a summary
//! band and command-specific artifacts into the output directory.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod gradcheck;
pub mod runner;
pub mod state_file;

pub use config::{parse_config, Command, ExperimentConfig};
pub use error::CliError;
pub use runner::{run, Report, RunOptions};
