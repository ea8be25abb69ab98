//! Scenarios, configuration files, result files and the command-line
//! driver built on `protective-core`.

pub mod benchmark;
pub mod cli;
pub mod coldatom;
pub mod config;
pub mod error;
pub mod output;
pub mod parallel;

pub use error::{SimError, SimResult};
