//! Command-line front end for `sclon-core`: the run config, the binary
//! array format, checkpoints, and the subcommands.

pub mod array;
pub mod checkpoint;
pub mod cli;
pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
