use num_complex::Complex64 as C64;

use super::eigen::{hermitian_eigensystem, hermitian_eigenvalues};
use super::matrix::{tensor, ComplexMatrix};
use crate::{tol, Error, Invariant, Result};

/// Real three-vector on (or inside) the Bloch sphere.
#[derive(Clone, Copy, Debug, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const Z: BlochVector = BlochVector {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        BlochVector { x, y, z }
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        BlochVector::new(v[0], v[1], v[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> BlochVector {
        BlochVector::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn sub(&self, other: &BlochVector) -> BlochVector {
        BlochVector::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }
}

/// Pure qubit `cos(polar/2)|H> + e^{i·phase} sin(polar/2)|V>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PureQubit {
    pub polar: f64,
    pub phase: f64,
}

impl PureQubit {
    pub fn new(polar: f64, phase: f64) -> Self {
        assert!(
            polar.is_finite() && phase.is_finite(),
            "angles must be finite"
        );
        PureQubit { polar, phase }
    }

    /// Real state in the xz-plane (phase 0).
    pub fn xz(polar: f64) -> Self {
        PureQubit::new(polar, 0.0)
    }

    pub fn horizontal() -> Self {
        PureQubit::new(0.0, 0.0)
    }

    pub fn ket(&self) -> [C64; 2] {
        let (s, c) = (0.5 * self.polar).sin_cos();
        [C64::new(c, 0.0), C64::from_polar(s, self.phase)]
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix(ComplexMatrix::outer(&self.ket()))
    }

    pub fn bloch(&self) -> BlochVector {
        let (sp, cp) = self.polar.sin_cos();
        BlochVector::new(sp * self.phase.cos(), sp * self.phase.sin(), cp)
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &PureQubit) -> C64 {
        let a = self.ket();
        let b = other.ket();
        a[0].conj() * b[0] + a[1].conj() * b[1]
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix of dimension 2 or 4.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

/// Which factor of a two-qubit state is traced out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    /// Qubit 1, the chronology-respecting rail.
    First,
    /// Qubit 2, the CTC rail.
    Second,
}

fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    if m.dim() == 2 {
        let a = m.get(0, 0).re;
        let d = m.get(1, 1).re;
        let b = m.get(0, 1);
        let disc = ((a - d) * (a - d) + 4.0 * b.norm_sqr()).sqrt();
        Ok(0.5 * (a + d - disc))
    } else {
        Ok(hermitian_eigenvalues(m)?[0])
    }
}

impl DensityMatrix {
    /// Validates `m` against the three density-matrix invariants.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let herm = m.hermiticity_defect();
        if herm > tol::HERMITIAN {
            return Err(Error::InvalidDensityMatrix {
                invariant: Invariant::Hermitian,
                deviation: herm,
            });
        }
        let tr = (m.trace() - C64::new(1.0, 0.0)).norm();
        if tr > tol::TRACE {
            return Err(Error::InvalidDensityMatrix {
                invariant: Invariant::UnitTrace,
                deviation: tr,
            });
        }
        let lmin = min_eigenvalue(&m.hermitian_part())?;
        if lmin < -tol::PSD {
            return Err(Error::InvalidDensityMatrix {
                invariant: Invariant::PositiveSemidefinite,
                deviation: -lmin,
            });
        }
        Ok(DensityMatrix(m))
    }

    /// Hermitian part of `m` validated as a density matrix. Used on the output
    /// of numerical pipelines, where only round-off separates `m` from `m†`.
    pub(crate) fn from_numeric(m: ComplexMatrix) -> Result<Self> {
        let herm = m.hermiticity_defect();
        if herm > tol::HERMITIAN {
            return Err(Error::InvalidDensityMatrix {
                invariant: Invariant::Hermitian,
                deviation: herm,
            });
        }
        DensityMatrix::new(m.hermitian_part())
    }

    pub fn from_ket(v: &[C64]) -> Result<Self> {
        DensityMatrix::new(ComplexMatrix::outer(v))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix(ComplexMatrix::identity(dim).scale(1.0 / dim as f64))
    }

    pub fn horizontal() -> Self {
        DensityMatrix(ComplexMatrix::diag(&[1.0, 0.0]))
    }

    pub fn vertical() -> Self {
        DensityMatrix(ComplexMatrix::diag(&[0.0, 1.0]))
    }

    pub fn diag2(a: f64) -> Result<Self> {
        DensityMatrix::new(ComplexMatrix::diag(&[a, 1.0 - a]))
    }

    #[inline]
    pub fn mat(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// Convex combination `Σ w_i ρ_i`. Weights must be non-negative and sum to one.
    pub fn mixture(weights: &[f64], states: &[DensityMatrix]) -> Result<Self> {
        assert_eq!(weights.len(), states.len());
        assert!(!states.is_empty());
        let dim = states[0].dim();
        let mut acc = ComplexMatrix::zeros(dim);
        for (w, s) in weights.iter().zip(states) {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: s.dim(),
                });
            }
            acc = acc + s.0.scale(*w);
        }
        DensityMatrix::from_numeric(acc)
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.purity() - 1.0).abs() <= tol
    }
}

/// Kronecker product of two density matrices.
pub fn tensor_states(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    Ok(DensityMatrix(tensor(a.mat(), b.mat())?))
}

/// Partial trace of a raw 4×4 operator over `traced`; no validation.
pub fn partial_trace_matrix(m: &ComplexMatrix, traced: Subsystem) -> ComplexMatrix {
    assert_eq!(m.dim(), 4, "partial trace needs a two-qubit operator");
    ComplexMatrix::from_fn(2, |r, c| match traced {
        Subsystem::First => m.get(r, c) + m.get(2 + r, 2 + c),
        Subsystem::Second => m.get(2 * r, 2 * c) + m.get(2 * r + 1, 2 * c + 1),
    })
}

/// Reduced state of the qubit that is kept when `traced` is traced out.
pub fn partial_trace(rho: &DensityMatrix, traced: Subsystem) -> Result<DensityMatrix> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho.dim(),
        });
    }
    DensityMatrix::new(*rho.mat())?;
    DensityMatrix::from_numeric(partial_trace_matrix(rho.mat(), traced))
}

fn same_dim(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

/// `½ Tr|a − b|`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    same_dim(a, b)?;
    let diff = (*a.mat() - *b.mat()).hermitian_part();
    let vals = hermitian_eigenvalues(&diff)?;
    Ok((0.5 * vals.iter().map(|v| v.abs()).sum::<f64>()).min(1.0))
}

/// Uhlmann fidelity `(Tr √(√a b √a))²`.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    same_dim(a, b)?;
    let f = if a.dim() == 2 {
        // Qubit closed form: Tr(ab) + 2 √(det a · det b).
        let det = |m: &ComplexMatrix| (m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0)).re;
        let tr_ab = (*a.mat() * *b.mat()).trace().re;
        tr_ab + 2.0 * (det(a.mat()).max(0.0) * det(b.mat()).max(0.0)).sqrt()
    } else {
        let sqrt_a = hermitian_eigensystem(a.mat())?.map_spectrum(|x| x.max(0.0).sqrt());
        let inner = (sqrt_a * *b.mat() * sqrt_a).hermitian_part();
        let s: f64 = hermitian_eigenvalues(&inner)?
            .iter()
            .map(|x| x.max(0.0).sqrt())
            .sum();
        s * s
    };
    Ok(f.clamp(0.0, 1.0))
}

/// Von Neumann entropy in bits, with `0·log 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let vals = hermitian_eigenvalues(rho.mat())?;
    Ok(vals
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.log2())
        .sum::<f64>()
        .max(0.0))
}

/// Bloch vector of a qubit density matrix, `ρ = ½(I + v·σ)`.
pub fn bloch_from_density(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: rho.dim(),
        });
    }
    let m = rho.mat();
    let off = m.get(0, 1);
    Ok(BlochVector::new(
        2.0 * off.re,
        -2.0 * off.im,
        (m.get(0, 0) - m.get(1, 1)).re,
    ))
}

/// Raw `½(I + v·σ)` without the norm check.
pub(crate) fn bloch_matrix(v: &BlochVector) -> ComplexMatrix {
    ComplexMatrix::from_complex(
        2,
        &[
            C64::new(0.5 * (1.0 + v.z), 0.0),
            C64::new(0.5 * v.x, -0.5 * v.y),
            C64::new(0.5 * v.x, 0.5 * v.y),
            C64::new(0.5 * (1.0 - v.z), 0.0),
        ],
    )
}

pub fn density_from_bloch(v: &BlochVector) -> Result<DensityMatrix> {
    let n = v.norm();
    if n > 1.0 + tol::BLOCH_NORM {
        return Err(Error::BlochNormExceeded(n));
    }
    DensityMatrix::new(bloch_matrix(v))
}
