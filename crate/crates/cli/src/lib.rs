//! Command-line front end: series ingestion, run configuration, reports
//! and plot files around the `evmix` library.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod plot;
pub mod report;
pub mod series;
pub mod synth;

pub use cli::{run, Outcome};
pub use error::{CliError, Kind};
