//! Command-line front end: JSON documents, subcommands and the bench harness.

pub mod bench;
pub mod commands;
pub mod documents;
pub mod error;

pub use error::CliError;
