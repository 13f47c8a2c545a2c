//! Numerical thresholds shared across the crate.
//!
//! All comparisons against these are absolute.

/// Hermiticity check: `max |A[i][j] - conj(A[j][i])|`.
pub const HERMITIAN: f64 = 1e-12;

/// Unit norm of a pure state vector.
pub const PURE_NORM: f64 = 1e-12;

/// Trace of a density operator, POVM completeness, and distribution normalization.
pub const TRACE: f64 = 1e-10;

/// Smallest eigenvalue allowed for a positive semidefinite operator.
pub const PSD: f64 = 1e-10;

/// Below this an outcome probability is treated as zero.
pub const ZERO_PROBABILITY: f64 = 1e-12;

/// A payoff counts as violating its classical bound only above `bound + VIOLATION`.
pub const VIOLATION: f64 = 1e-9;

/// Lower limit for entries of a probability distribution.
pub const NEGATIVE_PROBABILITY: f64 = 1e-12;

/// Partial-transpose eigenvalues below `-PPT` certify entanglement.
pub const PPT: f64 = 1e-10;
