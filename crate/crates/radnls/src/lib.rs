//! Standard-library companion to `radnls-core`: run configuration, on-disk
//! formats, a ground-state cache, reports, the acceptance checks and the
//! `radnls` command line.

pub mod cache;
pub mod checks;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod report;

pub use config::RunConfig;
pub use error::{exit, CliError, CliResult};
pub use report::{Format, Report, Stamp};
