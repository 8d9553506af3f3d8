//! Numerical tolerances shared across the crate.

/// Max-entry deviation allowed between a density matrix and its adjoint.
pub const HERMITIAN: f64 = 1e-12;
/// Allowed deviation of a density matrix trace from one.
pub const TRACE: f64 = 1e-12;
/// Most negative eigenvalue tolerated in a density matrix.
pub const PSD: f64 = 1e-10;
/// Hermiticity precondition for the eigensolver.
pub const EIGEN_INPUT: f64 = 1e-10;
/// Unitarity of gate matrices.
pub const UNITARY: f64 = 1e-12;
/// Completeness of weighted Kraus sets.
pub const COMPLETENESS: f64 = 1e-10;
/// Bloch-vector norm slack.
pub const BLOCH_NORM: f64 = 1e-12;
/// Singular values of (superoperator - identity) at or below this count as eigenvalue one.
pub const EIGENVALUE_ONE: f64 = 1e-9;
/// Upper bound on the fixed-point residual of a solved scenario.
pub const RESIDUAL: f64 = 1e-10;
/// Consistency fidelity must reach 1 - this.
pub const FIDELITY_GAP: f64 = 1e-9;
