//! Command-line front end for `hcorosa-core`: file formats, layered
//! configuration, the subcommands and the benchmark harness.

pub mod bench;
pub mod commands;
pub mod config;
pub mod io;

pub use bench::{run_bench, BenchConfig, BenchRow, CSV_HEADER};
pub use config::{run_method, Layers, Method, MethodParams, NoiseSpec, RunConfig};

use std::fmt;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERICAL,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<hcorosa_core::Error> for CliError {
    fn from(e: hcorosa_core::Error) -> Self {
        match e {
            hcorosa_core::Error::Numerical(_) => CliError::numerical(e.to_string()),
            _ => CliError::input(e.to_string()),
        }
    }
}
