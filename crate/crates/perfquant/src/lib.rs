//! Command-line front end for [`perfquant_core`]: reads measurement files,
//! runs the analyses and emits JSON reports.

pub mod cli;
pub mod dataset;
pub mod report;

pub use cli::{run, Cli, Outcome, EXIT_DETECTED, EXIT_ERROR};
