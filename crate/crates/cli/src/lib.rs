//! Command-line front end: instance generation and verification reports.

pub mod args;
pub mod commands;
pub mod report;

pub use args::Cli;
pub use commands::{run, CliError};
pub use report::{Output, Verdict, EXIT_INPUT};
