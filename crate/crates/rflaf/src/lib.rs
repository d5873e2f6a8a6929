//! Experiment runner and file formats for `rflaf-core`.
//!
//! [`config`] parses TOML experiment descriptions, [`experiments`] runs them
//! and writes plain-text tables, and [`format`] reads and writes datasets and
//! model checkpoints.

pub mod config;
pub mod error;
pub mod experiments;
pub mod format;
pub mod table;

pub use error::{Error, Result};
