use thiserror::Error;

/// Errors produced by parsing, validation, embedding, and simulation.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed model text or JSON (position information included when
    /// available).
    #[error("parse error: {0}")]
    Parse(String),

    /// A structurally well-formed chain that violates an interconnection
    /// invariant (incompatible signal dimensions, bad branch counts, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// Mismatched operand dimensions in a single operation.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An operation was called outside its domain (e.g. extracting a bilinear
    /// form from a model with polynomial input terms).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A simulation produced a non-finite value; `time` is the first instant
    /// at which it was observed.
    #[error("non-finite value at t = {time}: {context}")]
    NonFinite { time: f64, context: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
