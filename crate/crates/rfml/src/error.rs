//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter is out of range or inconsistent.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Input data violates a structural requirement (non-finite entries,
    /// shape mismatches, empty patches).
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// A numerical routine failed (singular system, non-finite solution).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The neighborhood graph is not connected.
    #[error("neighborhood graph is disconnected ({components} components)")]
    DisconnectedGraph { components: usize },

    /// The estimated intrinsic dimension equals the ambient dimension, so
    /// there is nothing to reduce.
    #[error("dimension not reducible: intrinsic dimension {d} equals ambient dimension")]
    NotReducible { d: usize },

    /// The Ricci flow produced non-finite values on a patch.
    #[error("ricci flow diverged on patch {patch} at iteration {iteration}")]
    FlowDivergence { patch: usize, iteration: usize },

    /// A tabular input file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Filesystem failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
