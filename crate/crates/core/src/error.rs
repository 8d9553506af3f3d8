use thiserror::Error;

/// Density-matrix validity conditions, named in validation errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Invariant {
    Hermitian,
    UnitTrace,
    PositiveSemidefinite,
}

impl std::fmt::Display for Invariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Invariant::Hermitian => "hermitian",
            Invariant::UnitTrace => "unit trace",
            Invariant::PositiveSemidefinite => "positive semidefinite",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension {0} is outside the supported set {{2, 4}}")]
    UnsupportedDimension(usize),

    #[error("invalid density matrix: violates {invariant} (deviation {deviation:.3e})")]
    InvalidDensityMatrix {
        invariant: Invariant,
        deviation: f64,
    },

    #[error("matrix is not hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("gate is not unitary (max deviation of U†U from I: {0:.3e})")]
    NotUnitary(f64),

    #[error("channel is not trace preserving (max deviation of Σ w K†K from I: {0:.3e})")]
    IncompleteChannel(f64),

    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("bloch vector norm {0} exceeds 1")]
    BlochNormExceeded(f64),

    #[error("measurement axis is not a unit vector (norm {0})")]
    NonUnitAxis(f64),

    #[error("invalid preparation: {0}")]
    InvalidPreparation(String),

    #[error("fixed-point iteration did not converge after {iterations} steps (last step {last_step:.3e})")]
    NoConvergence { iterations: usize, last_step: f64 },

    #[error("consistency map has no density matrix among its fixed points")]
    EmptyFixedPointSet,

    #[error("no sign change of the advantage function for {0} in [0, 1]")]
    NoCrossing(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            lo: 0.0,
            hi: 1.0,
        })
    }
}
