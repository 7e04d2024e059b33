//! Error type shared by the library and the CLI.

use thiserror::Error;

/// Errors produced by potential ingestion, evaluation, and root finding.
#[derive(Debug, Error)]
pub enum Error {
    /// A potential violated a structural invariant (nonpositive width, bad samples, ...).
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    /// An input file or spec string could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// Evaluation left the range where scaled arithmetic is validated.
    #[error("evaluation out of range: {detail} (max |Im lambda| supported here: {max_abs_im})")]
    EvaluationOutOfRange { detail: String, max_abs_im: f64 },

    /// The series truncation bound could not be brought below the requested
    /// tolerance within the term cap.
    #[error("series truncation failure: achieved bound {achieved} after {terms} terms")]
    TruncationFailure { achieved: f64, terms: usize },

    /// A zero of `a` persists on (or too close to) a contour after jittering.
    #[error("boundary zero: {0}")]
    BoundaryZero(String),

    /// Newton refinement ended with a residual above the configured tolerance.
    #[error("refinement residual {residual} exceeds tolerance {tol} at {location}")]
    ResidualTooLarge {
        location: num_complex::Complex64,
        residual: f64,
        tol: f64,
    },

    /// `Y_p` is requested at an exponent where the defining integral diverges.
    #[error("Y_p integral diverges for p = {p} (requires p > 1)")]
    DivergentIntegral { p: f64 },

    /// A check could not be decided (e.g. a zero stays near the Jensen circle
    /// after all jitter attempts).
    #[error("inconclusive: {0}")]
    Inconclusive(String),

    /// Filesystem failure while reading inputs or writing outputs.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
