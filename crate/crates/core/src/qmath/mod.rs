//! Dense complex linear algebra for one- and two-qubit systems.

mod eigen;
mod matrix;
mod state;

pub use eigen::{
    hermitian_eigensystem, hermitian_eigenvalues, singular_values, symmetric_eigensystem,
    Eigensystem,
};
pub use matrix::{basis_ket, tensor, tensor_ket, ComplexMatrix};
pub use state::{
    bloch_from_density, density_from_bloch, fidelity, partial_trace, partial_trace_matrix,
    tensor_states, trace_distance, von_neumann_entropy, BlochVector, DensityMatrix, PureQubit,
    Subsystem,
};

pub use num_complex::Complex64 as C64;
