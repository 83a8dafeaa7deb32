//! Batch driver for the sphere Casimir solver: config files, commands and
//! structured output.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, Cli, CliError};
pub use config::{load_config, parse_config, ConfigError, RunConfig};
