//! Experiment driver behind the `she-lab` binary.
//!
//! Each experiment reads a TOML config, runs a seed ensemble through
//! `she-core`, writes a deterministic JSON report (plus a separate timing
//! sidecar, so reports are byte-stable across runs), and prints one verdict
//! line per check. The `plot` subcommand renders any report's series block
//! to SVG.

// Negated float comparisons like `!(s > 0.0)` deliberately reject NaN in the
// same test; indexed loops mirror the lattice-site indexing of `she-core`.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

use std::fmt;

pub mod config;
pub mod experiments;
pub mod io;
pub mod plot;
pub mod report;
pub mod tolerances;

/// Error phases, mapped to distinct process exit codes by `main`.
#[derive(Debug)]
pub enum CliError {
    /// Bad or missing configuration (exit 3).
    Config(String),
    /// A numerical run failed (exit 4).
    Numerics(String),
    /// Filesystem trouble while reading inputs or writing artifacts (exit 4).
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerics(m) => write!(f, "numerical error: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<she_core::Error> for CliError {
    fn from(e: she_core::Error) -> Self {
        CliError::Numerics(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
