//! File formats, configuration and the sweep runner behind the `hrisk` CLI.

pub mod calib;
pub mod commands;
pub mod config;
pub mod csvio;
pub mod deltas;
pub mod error;
pub mod runner;

pub use error::{LabError, Result};
