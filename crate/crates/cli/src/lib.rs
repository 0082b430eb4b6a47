//! Command-line front end: JSON datum files in, deterministic JSON reports out.

pub mod commands;
pub mod report;
pub mod schema;

pub use commands::{execute, run, Cli, Command};
pub use report::Report;
pub use schema::{DatumFile, SchemaError};
