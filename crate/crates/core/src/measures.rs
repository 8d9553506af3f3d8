//! Distinguishability of qubit pairs: the discordant-outcome measure ℒ, its
//! optimum over measurement axes, trace distance and the Helstrom bound.

use serde::{Deserialize, Serialize};

use crate::circuits::depolarize;
use crate::qmath::{
    bloch_from_density, hermitian_eigensystem, symmetric_eigensystem, trace_distance, BlochVector,
    ComplexMatrix, DensityMatrix, PureQubit,
};
use crate::{tol, Error, Result};

/// Projective two-outcome measurement; the "+" projector is `½(I + n·σ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementDirection {
    axis: BlochVector,
}

impl MeasurementDirection {
    pub fn new(axis: BlochVector) -> Result<Self> {
        let norm = axis.norm();
        if (norm - 1.0).abs() > tol::BLOCH_NORM {
            return Err(Error::NonUnitAxis(norm));
        }
        Ok(MeasurementDirection { axis })
    }

    pub fn sigma_z() -> Self {
        MeasurementDirection {
            axis: BlochVector::Z,
        }
    }

    pub fn axis(&self) -> BlochVector {
        self.axis
    }

    /// `(P₊, P₋)`.
    pub fn projectors(&self) -> (ComplexMatrix, ComplexMatrix) {
        let n = self.axis;
        let n_sigma = ComplexMatrix::pauli_x().scale(n.x)
            + ComplexMatrix::pauli_y().scale(n.y)
            + ComplexMatrix::pauli_z().scale(n.z);
        let id = ComplexMatrix::identity(2);
        ((id + n_sigma).scale(0.5), (id - n_sigma).scale(0.5))
    }
}

fn expectation(p: &ComplexMatrix, rho: &DensityMatrix) -> f64 {
    (*p * *rho.mat()).trace().re
}

fn check_pair(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<()> {
    for r in [rho1, rho2] {
        if r.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: r.dim(),
            });
        }
    }
    Ok(())
}

/// Probability that the same projective measurement on both states gives
/// discordant outcomes: `⟨+|ρ₁|+⟩⟨−|ρ₂|−⟩ + ⟨−|ρ₁|−⟩⟨+|ρ₂|+⟩`.
pub fn l_measure(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    dir: &MeasurementDirection,
) -> Result<f64> {
    check_pair(rho1, rho2)?;
    let (plus, minus) = dir.projectors();
    let l = expectation(&plus, rho1) * expectation(&minus, rho2)
        + expectation(&minus, rho1) * expectation(&plus, rho2);
    Ok(l.clamp(0.0, 1.0))
}

/// Bloch form of [`l_measure`]: `(1 − (n·r₁)(n·r₂)) / 2`.
pub fn l_measure_bloch(r1: &BlochVector, r2: &BlochVector, axis: &BlochVector) -> f64 {
    0.5 * (1.0 - axis.dot(r1) * axis.dot(r2))
}

/// Orients an axis so the first clearly non-zero of (z, x, y) is positive.
fn canonical_sign(v: BlochVector) -> BlochVector {
    for c in [v.z, v.x, v.y] {
        if c.abs() > 1e-12 {
            return if c < 0.0 { v.scale(-1.0) } else { v };
        }
    }
    v
}

/// ℒ maximized over measurement axes, with the maximizing axis.
///
/// The maximum is `(1 − λ_min)/2` for the smallest eigenvalue of
/// `½(r₁r₂ᵀ + r₂r₁ᵀ)`. When that eigenvalue is degenerate the axis is the
/// z-axis projected onto its eigenspace, or z itself if the projection vanishes.
pub fn optimal_l(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
) -> Result<(f64, MeasurementDirection)> {
    check_pair(rho1, rho2)?;
    let r1 = bloch_from_density(rho1)?.to_array();
    let r2 = bloch_from_density(rho2)?.to_array();
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = 0.5 * (r1[i] * r2[j] + r2[i] * r1[j]);
        }
    }
    let (values, vectors) = symmetric_eigensystem(m);
    let lambda_min = values[0];
    let column = |k: usize| BlochVector::new(vectors[0][k], vectors[1][k], vectors[2][k]);

    let degenerate: Vec<usize> = (0..3)
        .filter(|&k| values[k] - lambda_min <= 1e-12)
        .collect();
    let axis = if degenerate.len() == 1 {
        canonical_sign(column(0))
    } else {
        let mut proj = BlochVector::new(0.0, 0.0, 0.0);
        for &k in &degenerate {
            let v = column(k);
            let c = v.z;
            proj = BlochVector::new(proj.x + c * v.x, proj.y + c * v.y, proj.z + c * v.z);
        }
        let norm = proj.norm();
        if norm > 1e-9 {
            proj.scale(1.0 / norm)
        } else {
            BlochVector::Z
        }
    };
    let axis = axis.scale(1.0 / axis.norm());
    let value = (0.5 * (1.0 - lambda_min)).clamp(0.0, 1.0);
    Ok((value, MeasurementDirection { axis }))
}

/// Helstrom bound `½(1 + 𝒟)` for equal priors.
pub fn p_success(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    check_pair(rho1, rho2)?;
    Ok(0.5 * (1.0 + trace_distance(rho1, rho2)?))
}

/// Minimum-error two-outcome measurement: guess `ρ₁` on the projector onto
/// the positive eigenspace of `ρ₁ − ρ₂`, `ρ₂` otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HelstromMeasurement {
    pub guess_first: ComplexMatrix,
}

impl HelstromMeasurement {
    pub fn new(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<Self> {
        check_pair(rho1, rho2)?;
        let eig = hermitian_eigensystem(&(*rho1.mat() - *rho2.mat()))?;
        let guess_first = eig.map_spectrum(|v| if v > 0.0 { 1.0 } else { 0.0 });
        Ok(HelstromMeasurement { guess_first })
    }

    /// Success probability with equal priors.
    pub fn success_probability(&self, rho1: &DensityMatrix, rho2: &DensityMatrix) -> f64 {
        let guess_second = ComplexMatrix::identity(2) - self.guess_first;
        0.5 * (expectation(&self.guess_first, rho1) + expectation(&guess_second, rho2))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistinguishabilityReport {
    #[serde(rename = "L_sigma_z")]
    pub l_sigma_z: f64,
    #[serde(rename = "L_optimal")]
    pub l_optimal: f64,
    pub optimal_axis: MeasurementDirection,
    pub trace_dist: f64,
    pub p_succ_optimal: f64,
}

pub fn report(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<DistinguishabilityReport> {
    let (l_optimal, optimal_axis) = optimal_l(rho1, rho2)?;
    let trace_dist = trace_distance(rho1, rho2)?;
    Ok(DistinguishabilityReport {
        l_sigma_z: l_measure(rho1, rho2, &MeasurementDirection::sigma_z())?,
        l_optimal,
        optimal_axis,
        trace_dist,
        p_succ_optimal: 0.5 * (1.0 + trace_dist),
    })
}

/// Standard quantum mechanics: the un-evolved pair `{|H⟩, ψ(φ)}` after input
/// depolarisation `p`.
pub fn qm_baseline(phi: f64, p: f64) -> Result<DistinguishabilityReport> {
    let rho1 = depolarize(&DensityMatrix::horizontal(), p)?;
    let rho2 = depolarize(&PureQubit::xz(phi).density(), p)?;
    report(&rho1, &rho2)
}
