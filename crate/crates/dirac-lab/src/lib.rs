//! Resonances of one-dimensional massless Dirac operators.
//!
//! The operator is `-iJ d/dx + V` on the line, with `J = diag(1, -1)` and an
//! off-diagonal potential `V = [[0, q], [conj(q), 0]]` built from a
//! complex-valued `q` supported in `[0, gamma]`. Scattering data is encoded in
//! the Jost coefficients `a(lambda)`, `b(lambda)`; `1/a` is the transmission
//! coefficient, `a` extends to an entire function, and its zeros in the lower
//! half-plane are the resonances.
//!
//! The crate provides:
//!
//! * [`potential`] — piecewise-constant potentials, file ingestion, builtins;
//! * [`jost`] — evaluation of `a`, `b`, `a'` by exact cell propagators and,
//!   independently, by the iterated-integral series with a certified
//!   truncation bound;
//! * [`rootfinder`] — all zeros of `a` in a rectangle of the lower half-plane
//!   via winding numbers and Newton refinement;
//! * [`estimates`] — the quantitative checks: zero-counting bound, Carleson
//!   property of the shifted zero measure, the resonance-sum inequality, the
//!   Jensen identity, and the exponential-type envelope;
//! * [`cli`] — batch front end emitting JSON reports and CSV plot data.

pub mod cli;
pub mod error;
pub mod estimates;
pub mod jost;
pub mod potential;
pub mod quad;
pub mod rootfinder;
pub mod special;

pub use error::Error;
pub use jost::{cell_propagator, jost_a_prime, jost_a_series, jost_ab, smatrix};
pub use jost::{JostValue, Mat2, SeriesResult};
pub use potential::{Cell, Potential};
pub use rootfinder::{
    counting_function, find_resonances, wind, Rectangle, Resonance, RootConfig, WindingCount,
};

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
