//! Crate-level error type.

use alloc::string::String;
use core::fmt;

/// Errors reported by fallible operations in this crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// An exact (exponential-time) routine was asked to run above its size cap.
    TooLarge {
        what: &'static str,
        n: usize,
        limit: usize,
    },
    /// A vector or mask does not match the ground-set dimension.
    DimensionMismatch { expected: usize, got: usize },
    /// Structurally invalid input (bad weights, malformed blocks, ...).
    Invalid(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::TooLarge { what, n, limit } => {
                write!(f, "{what} supports at most n = {limit} elements, got n = {n}")
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::Invalid(msg) => write!(f, "invalid input: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}
