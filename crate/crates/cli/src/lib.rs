//! Command-line harness: problem registry, trace files, and the `solve`,
//! `certify`, `verify`, `repro-figure1` and `batch` commands.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod registry;
pub mod trace_io;

pub use cli::main_with_args;
pub use config::{ExperimentConfig, NormChoice, ProblemSource};
pub use error::{exit, CliError};
