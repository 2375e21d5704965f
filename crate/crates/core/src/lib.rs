//! Core of the Socratic deliberation platform: domain types, the
//! per-participant session engine, the Socratic dialogue loop, chat
//! providers, storage with export/import, and the analysis metrics.

pub mod clock;
pub mod dialogue;
pub mod domain;
pub mod error;
pub mod ids;
pub mod metrics;
pub mod provider;
pub mod questions;
pub mod service;
pub mod session;
pub mod store;
pub mod view;

pub use error::{Error, Result};
