//! Experiment runner and command-line tools over `flatdet`.

pub mod canonical;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod runner;

pub use error::CliError;
