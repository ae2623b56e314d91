//! File formats, parallel bootstrap and command-line front end for
//! compositional difference-in-differences.
//!
//! The estimators themselves live in `codid-core`; this crate reads panels
//! from CSV, writes versioned JSON (`codid.v1`) and long-format plot data,
//! and spreads bootstrap replicates over threads without changing a single
//! draw.

pub mod commands;
pub mod csv_io;
pub mod error;
pub mod json;
pub mod parallel;
pub mod spec_file;

pub use commands::{run, Command, Format, Output, RunConfig};
pub use error::{CliError, Result};
