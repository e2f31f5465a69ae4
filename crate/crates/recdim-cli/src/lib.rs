//! Command layer for the `recdim` binary: argument parsing, configuration
//! resolution, output rendering, and exit-code mapping. The binary in
//! `main.rs` is a thin wrapper; integration tests drive [`commands::execute`]
//! directly.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{execute, exit_code_for, Cli, Command};
pub use output::CommandOutput;
