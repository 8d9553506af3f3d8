//! Two-qubit gates, noise channels, and the interaction `U′` used inside the loop.
//!
//! Basis order for two-qubit operators is `(HH, HV, VH, VV)`, with qubit 1 (the
//! chronology-respecting rail) as the most significant index.

use std::f64::consts::FRAC_PI_2;

use crate::error::check_unit_interval;
use crate::qmath::{ComplexMatrix, DensityMatrix};
use crate::{tol, Error, Result};

/// Unitary 4×4 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitGate(ComplexMatrix);

impl TwoQubitGate {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if mat.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: mat.dim(),
            });
        }
        let defect = mat.unitarity_defect();
        if defect > tol::UNITARY {
            return Err(Error::NotUnitary(defect));
        }
        Ok(TwoQubitGate(mat))
    }

    pub fn identity() -> Self {
        TwoQubitGate(ComplexMatrix::identity(4))
    }

    #[inline]
    pub fn mat(&self) -> &ComplexMatrix {
        &self.0
    }

    /// `self · first`: apply `first`, then `self`.
    pub fn after(&self, first: &TwoQubitGate) -> TwoQubitGate {
        TwoQubitGate(self.0 * first.0)
    }
}

pub fn make_swap() -> TwoQubitGate {
    TwoQubitGate(ComplexMatrix::from_real(
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        ],
    ))
}

/// CNOT with qubit 1 as control.
pub fn make_cnot() -> TwoQubitGate {
    TwoQubitGate(ComplexMatrix::from_real(
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, 1.0, 0.0,
        ],
    ))
}

pub fn make_cz() -> TwoQubitGate {
    TwoQubitGate(ComplexMatrix::diag(&[1.0, 1.0, 1.0, -1.0]))
}

/// Controlled π-rotation of qubit 2 about the xz-plane axis at angle `theta_xz`,
/// controlled by qubit 1. The controlled block is `[[cos θ, sin θ], [sin θ, −cos θ]]`.
pub fn make_cu_xz(theta_xz: f64) -> TwoQubitGate {
    let (s, c) = theta_xz.sin_cos();
    TwoQubitGate(ComplexMatrix::from_real(
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, c, s, //
            0.0, 0.0, s, -c,
        ],
    ))
}

/// One weighted Kraus term; the Kraus operator is `√weight · op`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrausTerm {
    pub weight: f64,
    pub op: ComplexMatrix,
}

/// Trace-preserving two-qubit channel `ρ ↦ Σ w_k op_k ρ op_k†`.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitChannel {
    terms: Vec<KrausTerm>,
}

impl QubitChannel {
    /// Builds a channel, dropping zero-weight terms and checking completeness.
    pub fn new(terms: Vec<KrausTerm>) -> Result<Self> {
        let mut kept = Vec::with_capacity(terms.len());
        for t in terms {
            if !(0.0..=1.0).contains(&t.weight) {
                return Err(Error::OutOfRange {
                    name: "kraus weight",
                    value: t.weight,
                    lo: 0.0,
                    hi: 1.0,
                });
            }
            if t.op.dim() != 4 {
                return Err(Error::DimensionMismatch {
                    expected: 4,
                    got: t.op.dim(),
                });
            }
            if t.weight > 0.0 {
                kept.push(t);
            }
        }
        let ch = QubitChannel { terms: kept };
        let defect = ch.completeness_defect();
        if defect > tol::COMPLETENESS {
            return Err(Error::IncompleteChannel(defect));
        }
        Ok(ch)
    }

    pub fn unitary(gate: &TwoQubitGate) -> Self {
        QubitChannel {
            terms: vec![KrausTerm {
                weight: 1.0,
                op: *gate.mat(),
            }],
        }
    }

    pub fn identity() -> Self {
        QubitChannel::unitary(&TwoQubitGate::identity())
    }

    pub fn terms(&self) -> &[KrausTerm] {
        &self.terms
    }

    /// `‖Σ w_k op_k† op_k − I‖_max`.
    pub fn completeness_defect(&self) -> f64 {
        let sum = self.terms.iter().fold(ComplexMatrix::zeros(4), |acc, t| {
            acc + (t.op.dagger() * t.op).scale(t.weight)
        });
        sum.max_abs_diff(&ComplexMatrix::identity(4))
    }

    /// The channel preceded by the unitary `first`.
    pub fn after_unitary(&self, first: &TwoQubitGate) -> QubitChannel {
        QubitChannel {
            terms: self
                .terms
                .iter()
                .map(|t| KrausTerm {
                    weight: t.weight,
                    op: t.op * *first.mat(),
                })
                .collect(),
        }
    }

    /// Applies the channel to an arbitrary 4×4 operator (linear extension).
    pub fn apply_operator(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.terms.iter().fold(ComplexMatrix::zeros(4), |acc, t| {
            acc + t.op.conjugate(m).scale(t.weight)
        })
    }
}

/// `ρ ↦ (1−ε) U ρ U† + ε ρ`.
pub fn gate_failure_channel(gate: &TwoQubitGate, epsilon: f64) -> Result<QubitChannel> {
    check_unit_interval("epsilon", epsilon)?;
    QubitChannel::new(vec![
        KrausTerm {
            weight: 1.0 - epsilon,
            op: *gate.mat(),
        },
        KrausTerm {
            weight: epsilon,
            op: ComplexMatrix::identity(4),
        },
    ])
}

pub fn apply_channel(ch: &QubitChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho.dim(),
        });
    }
    let defect = ch.completeness_defect();
    if defect > tol::COMPLETENESS {
        return Err(Error::IncompleteChannel(defect));
    }
    DensityMatrix::from_numeric(ch.apply_operator(rho.mat()))
}

/// Single-qubit depolarising channel of strength `p`:
/// `(1 − 3p/4) ρ + (p/4)(XρX + YρY + ZρZ)`.
pub fn depolarize(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    check_unit_interval("p", p)?;
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: rho.dim(),
        });
    }
    let m = *rho.mat();
    let paulis = [
        ComplexMatrix::pauli_x(),
        ComplexMatrix::pauli_y(),
        ComplexMatrix::pauli_z(),
    ];
    let twirl = paulis
        .iter()
        .fold(ComplexMatrix::zeros(2), |acc, s| acc + s.conjugate(&m));
    DensityMatrix::from_numeric(m.scale(1.0 - 0.75 * p) + twirl.scale(0.25 * p))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CircuitKind {
    /// `U′ = SWAP · CNOT`.
    SwapCnot,
    /// `U′ = CU_xz(θ) · SWAP`.
    SwapThenCu { theta_xz: f64 },
}

/// Interaction and decoherence parameters of one simulated loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircuitSpec {
    pub kind: CircuitKind,
    /// Gate failure probability ε.
    pub gate_noise: f64,
    /// Input depolarisation strength p.
    pub input_noise: f64,
}

impl CircuitSpec {
    pub fn swap_cnot() -> Self {
        CircuitSpec {
            kind: CircuitKind::SwapCnot,
            gate_noise: 0.0,
            input_noise: 0.0,
        }
    }

    pub fn swap_cu(theta_xz: f64) -> Self {
        CircuitSpec {
            kind: CircuitKind::SwapThenCu { theta_xz },
            gate_noise: 0.0,
            input_noise: 0.0,
        }
    }

    pub fn with_noise(mut self, p: f64, epsilon: f64) -> Self {
        self.input_noise = p;
        self.gate_noise = epsilon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_unit_interval("epsilon", self.gate_noise)?;
        check_unit_interval("p", self.input_noise)?;
        if let CircuitKind::SwapThenCu { theta_xz } = self.kind {
            if !(-FRAC_PI_2..FRAC_PI_2).contains(&theta_xz) {
                return Err(Error::OutOfRange {
                    name: "theta_xz",
                    value: theta_xz,
                    lo: -FRAC_PI_2,
                    hi: FRAC_PI_2,
                });
            }
        }
        Ok(())
    }

    pub fn is_noise_free(&self) -> bool {
        self.gate_noise == 0.0 && self.input_noise == 0.0
    }
}

/// The full two-qubit channel `U′` including gate failure.
///
/// A failed gate acts as the identity, so the SWAP survives: with probability ε
/// the loop reduces to a bare SWAP.
pub fn build_interaction(spec: &CircuitSpec) -> Result<QubitChannel> {
    spec.validate()?;
    let swap = make_swap();
    let ch = match spec.kind {
        CircuitKind::SwapCnot => {
            let failing = gate_failure_channel(&make_cnot(), spec.gate_noise)?;
            QubitChannel {
                terms: failing
                    .terms
                    .iter()
                    .map(|t| KrausTerm {
                        weight: t.weight,
                        op: *swap.mat() * t.op,
                    })
                    .collect(),
            }
        }
        CircuitKind::SwapThenCu { theta_xz } => {
            gate_failure_channel(&make_cu_xz(theta_xz), spec.gate_noise)?.after_unitary(&swap)
        }
    };
    Ok(ch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{
        bloch_from_density, density_from_bloch, tensor_states, BlochVector, PureQubit, C64,
    };
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn ket(bits: &str) -> Vec<C64> {
        let idx = ["HH", "HV", "VH", "VV"]
            .iter()
            .position(|b| *b == bits)
            .unwrap();
        crate::qmath::basis_ket(4, idx)
    }

    fn neg(v: Vec<C64>) -> Vec<C64> {
        v.into_iter().map(|x| -x).collect()
    }

    #[test]
    fn basic_gate_actions() {
        assert_eq!(make_swap().mat().apply(&ket("HV")), ket("VH"));
        assert_eq!(make_cnot().mat().apply(&ket("VH")), ket("VV"));
        assert_eq!(make_cz().mat().apply(&ket("VV")), neg(ket("VV")));
    }

    #[test]
    fn constructors_are_unitary() {
        for g in [
            make_swap(),
            make_cnot(),
            make_cz(),
            make_cu_xz(0.3),
            make_cu_xz(-1.2),
        ] {
            assert!(g.mat().unitarity_defect() <= 1e-12);
        }
        assert!(matches!(
            TwoQubitGate::new(ComplexMatrix::diag(&[1.0, 1.0, 1.0, 2.0])),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn cu_xz_special_angles() {
        assert!(
            make_cu_xz(0.0)
                .mat()
                .max_abs_diff(&ComplexMatrix::diag(&[1.0, 1.0, 1.0, -1.0]))
                < 1e-15
        );
        assert!(make_cu_xz(PI / 2.0).mat().max_abs_diff(make_cnot().mat()) < 1e-15);
        let h = 1.0 / 2f64.sqrt();
        let ch = ComplexMatrix::from_real(
            4,
            &[
                1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, h, h, 0.0, 0.0, h, -h,
            ],
        );
        assert!(make_cu_xz(FRAC_PI_4).mat().max_abs_diff(&ch) < 1e-15);
    }

    #[test]
    fn depolarize_examples() {
        let rho = PureQubit::new(0.7, 0.4).density();
        assert!(depolarize(&rho, 0.0).unwrap().mat().max_abs_diff(rho.mat()) < 1e-15);
        let h = DensityMatrix::horizontal();
        let full = depolarize(&h, 1.0).unwrap();
        assert!(
            full.mat()
                .max_abs_diff(DensityMatrix::maximally_mixed(2).mat())
                < 1e-15
        );
        let half = depolarize(&h, 0.5).unwrap();
        assert!(half.mat().max_abs_diff(&ComplexMatrix::diag(&[0.75, 0.25])) < 1e-15);
        assert!(matches!(depolarize(&h, 1.5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn gate_failure_limits() {
        let gate = make_cu_xz(FRAC_PI_4);
        let rho = tensor_states(
            &PureQubit::new(1.0, 0.5).density(),
            &PureQubit::new(2.0, 1.0).density(),
        )
        .unwrap();
        let ideal = apply_channel(&gate_failure_channel(&gate, 0.0).unwrap(), &rho).unwrap();
        assert!(ideal.mat().max_abs_diff(&gate.mat().conjugate(rho.mat())) < 1e-15);
        let failed = apply_channel(&gate_failure_channel(&gate, 1.0).unwrap(), &rho).unwrap();
        assert!(failed.mat().max_abs_diff(rho.mat()) < 1e-15);
        assert!(gate_failure_channel(&gate, -0.1).is_err());
    }

    #[test]
    fn half_failed_hadamard_on_vh() {
        // ½|V><V|⊗|H><H| + ½|V><V|⊗|+><+|
        let gate = make_cu_xz(FRAC_PI_4);
        let rho = DensityMatrix::from_ket(&ket("VH")).unwrap();
        let out = apply_channel(&gate_failure_channel(&gate, 0.5).unwrap(), &rho).unwrap();
        let v = DensityMatrix::vertical();
        let plus = PureQubit::xz(PI / 2.0).density();
        let expected = tensor_states(&v, &DensityMatrix::horizontal())
            .unwrap()
            .mat()
            .scale(0.5)
            + tensor_states(&v, &plus).unwrap().mat().scale(0.5);
        assert!(out.mat().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn one_third_failure_on_vh() {
        let gate = make_cu_xz(FRAC_PI_4);
        let rho = DensityMatrix::from_ket(&ket("VH")).unwrap();
        let out = apply_channel(&gate_failure_channel(&gate, 1.0 / 3.0).unwrap(), &rho).unwrap();
        let expected =
            gate.mat().conjugate(rho.mat()).scale(2.0 / 3.0) + rho.mat().scale(1.0 / 3.0);
        assert!(out.mat().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn identity_and_unitary_channels() {
        let rho = tensor_states(
            &PureQubit::new(0.4, 0.1).density(),
            &DensityMatrix::maximally_mixed(2),
        )
        .unwrap();
        let same = apply_channel(&QubitChannel::identity(), &rho).unwrap();
        assert!(same.mat().max_abs_diff(rho.mat()) < 1e-15);
        let u = make_cnot();
        let out = apply_channel(&QubitChannel::unitary(&u), &rho).unwrap();
        assert!(out.mat().max_abs_diff(&u.mat().conjugate(rho.mat())) < 1e-15);
    }

    #[test]
    fn incomplete_channel_rejected() {
        let err = QubitChannel::new(vec![KrausTerm {
            weight: 0.5,
            op: ComplexMatrix::identity(4),
        }]);
        assert!(matches!(err, Err(Error::IncompleteChannel(_))));
    }

    #[test]
    fn interaction_layouts() {
        let sc = build_interaction(&CircuitSpec::swap_cnot()).unwrap();
        assert_eq!(sc.terms().len(), 1);
        assert!(
            sc.terms()[0]
                .op
                .max_abs_diff(&(*make_swap().mat() * *make_cnot().mat()))
                < 1e-15
        );

        let cu = build_interaction(&CircuitSpec::swap_cu(FRAC_PI_4)).unwrap();
        assert_eq!(cu.terms().len(), 1);
        let expected = *make_cu_xz(FRAC_PI_4).mat() * *make_swap().mat();
        assert!(cu.terms()[0].op.max_abs_diff(&expected) < 1e-15);

        let failed =
            build_interaction(&CircuitSpec::swap_cu(FRAC_PI_4).with_noise(0.0, 1.0)).unwrap();
        assert_eq!(failed.terms().len(), 1);
        assert!(failed.terms()[0].op.max_abs_diff(make_swap().mat()) < 1e-15);
    }

    #[test]
    fn spec_validation() {
        assert!(CircuitSpec::swap_cu(PI / 2.0).validate().is_err());
        assert!(CircuitSpec::swap_cu(-PI / 2.0).validate().is_ok());
        assert!(CircuitSpec::swap_cnot()
            .with_noise(1.5, 0.0)
            .validate()
            .is_err());
        assert!(CircuitSpec::swap_cnot()
            .with_noise(0.0, -0.5)
            .validate()
            .is_err());
    }

    #[test]
    fn completeness_on_epsilon_grid() {
        let gate = make_cu_xz(0.37);
        for k in 0..=100 {
            let ch = gate_failure_channel(&gate, k as f64 / 100.0).unwrap();
            assert!(ch.completeness_defect() <= 1e-10);
        }
    }

    proptest! {
        #[test]
        fn cu_xz_is_involutive(theta in -10.0f64..10.0) {
            let g = make_cu_xz(theta);
            let sq = *g.mat() * *g.mat();
            prop_assert!(sq.max_abs_diff(&ComplexMatrix::identity(4)) <= 1e-12);
            prop_assert!(g.mat().unitarity_defect() <= 1e-12);
        }

        #[test]
        fn depolarize_scales_bloch_vector(
            x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0, p in 0.0f64..=1.0
        ) {
            let v = BlochVector::new(x, y, z);
            let v = if v.norm() > 1.0 { v.scale(1.0 / v.norm()) } else { v };
            let rho = density_from_bloch(&v).unwrap();
            let out = bloch_from_density(&depolarize(&rho, p).unwrap()).unwrap();
            let expected = v.scale(1.0 - p);
            prop_assert!(out.sub(&expected).norm() <= 1e-12);
        }
    }
}
