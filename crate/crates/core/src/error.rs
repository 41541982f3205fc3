//! Error types shared across the crate.

use thiserror::Error;

/// Failures in loop construction, parsing and the string operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoopError {
    #[error("path is not closed: ends at {end}, started at {start}")]
    NotClosed { start: String, end: String },
    #[error("input backtracks at location {position}")]
    Backtracking { position: usize },
    #[error("edge {position} does not start where the previous edge ends")]
    Disconnected { position: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dimension {0} is unsupported (need 2 <= d <= 64)")]
    BadDimension(usize),
    #[error("bad token {token:?} at position {position}: {reason}")]
    BadToken { position: usize, token: String, reason: String },
    #[error("axis {axis} out of range for d = {dim} at position {position}")]
    AxisOutOfRange { position: usize, axis: usize, dim: usize },
    #[error("location {location} out of range for a loop of length {len}")]
    LocationOutOfRange { location: usize, len: usize },
    #[error("loop index {index} out of range for a sequence of {len} loops")]
    LoopIndexOutOfRange { index: usize, len: usize },
    #[error("locations must differ, got x = y = {0}")]
    SameLocation(usize),
    #[error("edges at locations {x} and {y} are neither equal nor inverse")]
    EdgeMismatch { x: usize, y: usize },
    #[error("{op} requires {needed} edges at ({x}, {y})")]
    WrongCase { op: &'static str, needed: &'static str, x: usize, y: usize },
    #[error("operation on the null loop")]
    NullLoop,
    #[error("plaquette does not contain the edge at location {x} or its inverse")]
    PlaquetteMismatch { x: usize },
    #[error("not a plaquette: {0}")]
    NotAPlaquette(String),
}

/// Failures of the Monte Carlo oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GaugeError {
    #[error("vertex {vertex} within distance 1 of the loops lies outside the box")]
    OutsideMargin { vertex: String },
    #[error("edge {edge} is not inside the box")]
    EdgeOutsideBox { edge: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Loop(#[from] LoopError),
}

/// Failures of coefficient evaluation and persistence.
#[derive(Debug, Error)]
pub enum CoeffError {
    #[error("recursion revisited an entry still being evaluated: {0}")]
    Cycle(String),
    #[error("cache file: {0}")]
    Io(#[from] std::io::Error),
    #[error("cache format: {0}")]
    Format(String),
    #[error(transparent)]
    Loop(#[from] LoopError),
}

/// Failures parsing an exact rational.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse {input:?} as an exact rational: {reason}")]
pub struct RationalParseError {
    pub input: String,
    pub reason: String,
}
