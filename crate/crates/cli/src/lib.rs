//! Operator tooling for Socratic deliberation studies.

pub mod analyze;
pub mod client;
pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod script;
pub mod simulate;

pub use error::{CliError, Result};
