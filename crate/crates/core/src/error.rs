//! Shared error type.
//!
//! Variants are grouped by how a caller should react: bad inputs are
//! rejected up front, degenerate channels are a runtime numerical condition
//! that Monte Carlo loops may count and skip, and I/O failures carry the
//! underlying cause.

use std::io;

use thiserror::Error;

/// Any failure produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument or configuration value violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A gain lookup fell outside the angular hull of a tabulated pattern.
    /// Tabulated patterns never extrapolate.
    #[error("direction outside tabulated grid: {0}")]
    OutsideGrid(String),

    /// A pattern table failed to parse or does not form a complete grid.
    #[error("pattern table: {0}")]
    PatternTable(String),

    /// The user channels are linearly dependent (or close enough that the
    /// Gram matrix cannot be inverted reliably).
    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    /// Reading or writing an artifact failed.
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
