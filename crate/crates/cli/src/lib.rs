//! Command-line front end: file ingestion, dispatch and report rendering.

pub mod app;
pub mod input;
pub mod report;

pub use app::{run, AppError, Cli, Command, Outcome, RunConfig};
