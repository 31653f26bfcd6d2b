//! Configuration parsing, experiment orchestration and CSV / JSON output for
//! the `nlpdhgm` command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::{parse_config, ConfigLayer};
pub use error::{CliError, Result};
pub use output::{csv_string, emit_csv, emit_summary, RunManifest, Summary};
