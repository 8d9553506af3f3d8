//! Simulation of qubits traversing a Deutsch closed timelike curve.
//!
//! The crate is layered bottom-up:
//!
//! * [`qmath`]: dense 2- and 4-dimensional complex linear algebra, density
//!   matrices, partial traces, spectra and distances.
//! * [`circuits`]: the two-qubit gates and noise channels of the interaction.
//! * [`deutsch`]: the self-consistency fixed-point solver for the CTC qubit and
//!   evolution of chronology-respecting inputs.
//! * [`measures`]: distinguishability functionals and standard quantum baselines.
//! * [`experiments`]: parameter sweeps, decoherence thresholds and tabular records.
//! * [`acceptance`]: the end-to-end verification suite used by `ctcsim selftest`.
//!
//! Basis convention: `|H>` is `(1, 0)` and the Bloch `+z` pole, `|V>` is `(0, 1)`.
//! Two-qubit states are ordered `(chronology-respecting) ⊗ (CTC)`.

pub mod acceptance;
pub mod circuits;
pub mod deutsch;
mod error;
pub mod experiments;
pub mod io;
pub mod measures;
pub mod qmath;
pub mod tol;

pub use error::{Error, Invariant, Result};
