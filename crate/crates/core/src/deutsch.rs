//! Deutsch self-consistency solver.
//!
//! The CTC qubit must satisfy `ρ_CTC = Tr₁[E(ρ_in ⊗ ρ_CTC)]` for the interaction
//! channel `E`; the chronology-respecting output is then `Tr₂[E(ρ_in ⊗ ρ_CTC)]`.
//! The map `ρ ↦ Tr₁[E(ρ_in ⊗ ρ)]` is affine on the Bloch ball. When its fixed
//! points form more than a single state, the maximum-entropy member is chosen.

use crate::circuits::{build_interaction, depolarize, CircuitSpec, QubitChannel};
use crate::qmath::{
    bloch_from_density, density_from_bloch, fidelity, partial_trace_matrix, singular_values,
    tensor, trace_distance, von_neumann_entropy, BlochVector, ComplexMatrix, DensityMatrix,
    PureQubit, Subsystem, C64,
};
use crate::{tol, Error, Result};

/// How chronology-respecting inputs are prepared.
#[derive(Clone, Debug, PartialEq)]
pub enum PreparationMode {
    /// Directly prepared pure state; the consistency condition acts on it shot by shot.
    LocalPure(PureQubit),
    /// Improper mixture (reduced state of a larger entangled system).
    ImproperMixed(DensityMatrix),
    /// States steered by projecting half of an entangled resource. The CTC
    /// qubit only sees the unconditioned mixture.
    NonLocalEnsemble(Ensemble),
}

/// Labelled pure states with prior probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    states: Vec<PureQubit>,
    probs: Vec<f64>,
}

impl Ensemble {
    pub fn new(states: Vec<PureQubit>, probs: Vec<f64>) -> Result<Self> {
        if states.is_empty() || states.len() != probs.len() {
            return Err(Error::InvalidPreparation(format!(
                "{} states with {} probabilities",
                states.len(),
                probs.len()
            )));
        }
        if probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::InvalidPreparation("negative probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidPreparation(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Ensemble { states, probs })
    }

    /// Equal-weight ensemble.
    pub fn uniform(states: Vec<PureQubit>) -> Result<Self> {
        let n = states.len().max(1);
        Ensemble::new(states, vec![1.0 / n as f64; n])
    }

    pub fn states(&self) -> &[PureQubit] {
        &self.states
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `Σ p_i |ψ_i><ψ_i|`.
    pub fn mixture(&self) -> DensityMatrix {
        let rhos: Vec<DensityMatrix> = self.states.iter().map(PureQubit::density).collect();
        DensityMatrix::mixture(&self.probs, &rhos).expect("validated ensemble forms a state")
    }
}

impl PreparationMode {
    pub fn non_local(states: Vec<PureQubit>, probs: Vec<f64>) -> Result<Self> {
        Ok(PreparationMode::NonLocalEnsemble(Ensemble::new(
            states, probs,
        )?))
    }

    /// State seen by the CTC qubit before input noise.
    pub fn ctc_input(&self) -> DensityMatrix {
        match self {
            PreparationMode::LocalPure(q) => q.density(),
            PreparationMode::ImproperMixed(rho) => *rho,
            PreparationMode::NonLocalEnsemble(e) => e.mixture(),
        }
    }

    /// Local state of the chronology-respecting rail for each labelled preparation.
    ///
    /// For non-local preparation the rail carries no local record of the remote
    /// projection outcome, so every label enters as the unconditioned mixture.
    pub fn rail_states(&self) -> Vec<DensityMatrix> {
        match self {
            PreparationMode::LocalPure(q) => vec![q.density()],
            PreparationMode::ImproperMixed(rho) => vec![*rho],
            PreparationMode::NonLocalEnsemble(e) => vec![e.mixture(); e.states.len()],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverMethod {
    /// Eigenvalue-one eigenspace of the superoperator, then the entropy maximizer.
    EigenMaxEntropy,
    /// `ρ ← (1−λ)·map(ρ) + λ·ρ` from the maximally mixed state.
    DampedIteration,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub method: SolverMethod,
    /// Step-size stopping threshold (trace distance) for iteration.
    pub tol: f64,
    pub max_iter: usize,
    /// Weight λ kept on the previous iterate.
    pub damping: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            method: SolverMethod::EigenMaxEntropy,
            tol: 1e-12,
            max_iter: 10_000,
            damping: 0.5,
        }
    }
}

impl SolverOptions {
    pub fn damped() -> Self {
        SolverOptions {
            method: SolverMethod::DampedIteration,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPointResult {
    pub rho_ctc: DensityMatrix,
    /// Trace distance between `ρ_CTC` and its image under the consistency map.
    pub residual: f64,
    pub iterations: usize,
    /// Dimension of the eigenvalue-one eigenspace of the consistency superoperator.
    pub fixed_set_dimension: usize,
    pub entropy: f64,
    pub method: SolverMethod,
}

impl FixedPointResult {
    pub fn is_degenerate(&self) -> bool {
        self.fixed_set_dimension > 1
    }
}

fn map_operator(
    rho_in: &ComplexMatrix,
    interaction: &QubitChannel,
    m: &ComplexMatrix,
) -> ComplexMatrix {
    let joint = tensor(rho_in, m).expect("qubit ⊗ qubit");
    partial_trace_matrix(&interaction.apply_operator(&joint), Subsystem::First)
}

fn check_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: rho.dim(),
        });
    }
    Ok(())
}

/// `Tr₁[E(ρ_in ⊗ ρ)]`.
pub fn consistency_map(
    rho_in: &DensityMatrix,
    interaction: &QubitChannel,
    rho: &DensityMatrix,
) -> Result<DensityMatrix> {
    check_qubit(rho_in)?;
    check_qubit(rho)?;
    DensityMatrix::from_numeric(map_operator(rho_in.mat(), interaction, rho.mat()))
}

/// Matrix `M` of the consistency map on row-major vectorized 2×2 matrices:
/// `M · vec(ρ) = vec(consistency_map(ρ_in, E, ρ))`.
pub fn superoperator(rho_in: &DensityMatrix, interaction: &QubitChannel) -> Result<ComplexMatrix> {
    check_qubit(rho_in)?;
    let mut m = ComplexMatrix::zeros(4);
    for col in 0..4 {
        let mut unit = ComplexMatrix::zeros(2);
        unit.set(col / 2, col % 2, C64::new(1.0, 0.0));
        let image = map_operator(rho_in.mat(), interaction, &unit).vectorize();
        for (row, v) in image.into_iter().enumerate() {
            m.set(row, col, v);
        }
    }
    Ok(m)
}

/// Real Pauli-transfer form of the consistency map: entry `(i, j)` is
/// `½ Tr(σ_i · map(σ_j))` with `σ_0 = I`. Acts on `(t, x, y, z)` where
/// `ρ = ½(t·I + r·σ)`.
pub fn pauli_transfer(rho_in: &DensityMatrix, interaction: &QubitChannel) -> [[f64; 4]; 4] {
    let basis = [
        ComplexMatrix::identity(2),
        ComplexMatrix::pauli_x(),
        ComplexMatrix::pauli_y(),
        ComplexMatrix::pauli_z(),
    ];
    let mut r = [[0.0; 4]; 4];
    for (j, sj) in basis.iter().enumerate() {
        let image = map_operator(rho_in.mat(), interaction, sj);
        for (i, si) in basis.iter().enumerate() {
            r[i][j] = 0.5 * (*si * image).trace().re;
        }
    }
    r
}

/// Fixed points of the consistency map, reduced to the maximum-entropy member.
struct FixedSet {
    dimension: usize,
    max_entropy_point: BlochVector,
}

fn dot4(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn analyze_fixed_set(transfer: &[[f64; 4]; 4]) -> Result<FixedSet> {
    let mut shifted = *transfer;
    for (i, row) in shifted.iter_mut().enumerate() {
        row[i] -= 1.0;
    }
    let (sigma, right) = singular_values(shifted);
    let null: Vec<[f64; 4]> = (0..4)
        .filter(|&k| sigma[k] <= tol::EIGENVALUE_ONE)
        .map(|k| [right[0][k], right[1][k], right[2][k], right[3][k]])
        .collect();
    if null.is_empty() {
        return Err(Error::EmptyFixedPointSet);
    }

    // Particular solution with unit trace (t = 1) inside span(null).
    let taus: Vec<f64> = null.iter().map(|v| v[0]).collect();
    let tau_sq: f64 = taus.iter().map(|t| t * t).sum();
    if tau_sq < 1e-16 {
        return Err(Error::EmptyFixedPointSet);
    }
    let mut particular = [0.0; 4];
    for (v, t) in null.iter().zip(&taus) {
        for k in 0..4 {
            particular[k] += t * v[k] / tau_sq;
        }
    }

    // Traceless directions spanning the rest of the fixed set, orthonormalized.
    let mut directions: Vec<[f64; 4]> = Vec::new();
    for (v, t) in null.iter().zip(&taus) {
        let mut d = [0.0; 4];
        for k in 0..4 {
            d[k] = v[k] - t * particular[k];
        }
        for q in &directions {
            let proj = dot4(&d, q);
            for k in 0..4 {
                d[k] -= proj * q[k];
            }
        }
        let norm = dot4(&d, &d).sqrt();
        if norm > 1e-8 {
            directions.push(d.map(|x| x / norm));
        }
    }

    // Entropy of a qubit decreases strictly with Bloch length, so the maximizer
    // over the affine fixed set is its minimum-norm point.
    let mut point = particular;
    for q in &directions {
        let proj = dot4(&point, q);
        for k in 0..4 {
            point[k] -= proj * q[k];
        }
    }
    let r = BlochVector::new(point[1], point[2], point[3]);
    let norm = r.norm();
    if norm > 1.0 + 1e-9 {
        return Err(Error::EmptyFixedPointSet);
    }
    let r = if norm > 1.0 { r.scale(1.0 / norm) } else { r };
    Ok(FixedSet {
        dimension: null.len(),
        max_entropy_point: r,
    })
}

/// Dimension of the eigenvalue-one eigenspace of the consistency superoperator.
pub fn fixed_set_dimension(rho_in: &DensityMatrix, interaction: &QubitChannel) -> Result<usize> {
    check_qubit(rho_in)?;
    Ok(analyze_fixed_set(&pauli_transfer(rho_in, interaction))?.dimension)
}

fn damped_iteration(
    rho_in: &DensityMatrix,
    interaction: &QubitChannel,
    opts: &SolverOptions,
) -> Result<(DensityMatrix, usize)> {
    let lambda = opts.damping;
    let mut rho = DensityMatrix::maximally_mixed(2);
    let mut last_step = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let image = map_operator(rho_in.mat(), interaction, rho.mat());
        let next =
            DensityMatrix::from_numeric(image.scale(1.0 - lambda) + rho.mat().scale(lambda))?;
        last_step = trace_distance(&next, &rho)?;
        rho = next;
        if last_step < opts.tol {
            return Ok((rho, it));
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        last_step,
    })
}

/// Solves the consistency relation for `ρ_CTC`.
pub fn solve_fixed_point(
    rho_in: &DensityMatrix,
    interaction: &QubitChannel,
    opts: &SolverOptions,
) -> Result<FixedPointResult> {
    check_qubit(rho_in)?;
    let fixed = analyze_fixed_set(&pauli_transfer(rho_in, interaction))?;
    let (rho_ctc, iterations) = match opts.method {
        SolverMethod::EigenMaxEntropy => (density_from_bloch(&fixed.max_entropy_point)?, 0),
        SolverMethod::DampedIteration => damped_iteration(rho_in, interaction, opts)?,
    };
    let image = consistency_map(rho_in, interaction, &rho_ctc)?;
    Ok(FixedPointResult {
        rho_ctc,
        residual: trace_distance(&rho_ctc, &image)?,
        iterations,
        fixed_set_dimension: fixed.dimension,
        entropy: von_neumann_entropy(&rho_ctc)?,
        method: opts.method,
    })
}

/// `Tr₂[E(input ⊗ ρ_CTC)]`.
pub fn evolve_output(
    input: &DensityMatrix,
    rho_ctc: &DensityMatrix,
    interaction: &QubitChannel,
) -> Result<DensityMatrix> {
    check_qubit(input)?;
    check_qubit(rho_ctc)?;
    let joint = tensor(input.mat(), rho_ctc.mat())?;
    DensityMatrix::from_numeric(partial_trace_matrix(
        &interaction.apply_operator(&joint),
        Subsystem::Second,
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioOutput {
    /// State the CTC qubit adapted to (after input noise).
    pub rho_in: DensityMatrix,
    pub fixed_point: FixedPointResult,
    pub rho_out_per_input: Vec<DensityMatrix>,
    /// Fidelity between `ρ_CTC` and its image under the consistency map.
    pub consistency_fidelity: f64,
}

/// Solves the loop once for the preparation and evolves each input through it.
/// Input depolarisation is applied both to the state the CTC sees and to every
/// evolved input.
pub fn run_scenario(
    spec: &CircuitSpec,
    prep: &PreparationMode,
    inputs: &[DensityMatrix],
) -> Result<ScenarioOutput> {
    run_scenario_with(spec, prep, inputs, &SolverOptions::default())
}

pub fn run_scenario_with(
    spec: &CircuitSpec,
    prep: &PreparationMode,
    inputs: &[DensityMatrix],
    opts: &SolverOptions,
) -> Result<ScenarioOutput> {
    let interaction = build_interaction(spec)?;
    let rho_in = depolarize(&prep.ctc_input(), spec.input_noise)?;
    let fixed_point = solve_fixed_point(&rho_in, &interaction, opts)?;
    let rho_out_per_input = inputs
        .iter()
        .map(|x| {
            let noisy = depolarize(x, spec.input_noise)?;
            evolve_output(&noisy, &fixed_point.rho_ctc, &interaction)
        })
        .collect::<Result<Vec<_>>>()?;
    let image = consistency_map(&rho_in, &interaction, &fixed_point.rho_ctc)?;
    let consistency_fidelity = fidelity(&fixed_point.rho_ctc, &image)?;
    Ok(ScenarioOutput {
        rho_in,
        fixed_point,
        rho_out_per_input,
        consistency_fidelity,
    })
}

/// [`run_scenario`] with the preparation's own rail states as inputs.
pub fn run_prepared(spec: &CircuitSpec, prep: &PreparationMode) -> Result<ScenarioOutput> {
    run_scenario(spec, prep, &prep.rail_states())
}

/// Output of a classical (proper) mixture: every member runs the loop with its
/// own fixed point and the outputs are averaged.
pub fn proper_mixture_output(spec: &CircuitSpec, ensemble: &Ensemble) -> Result<DensityMatrix> {
    let outs = ensemble
        .states()
        .iter()
        .map(|q| {
            let prep = PreparationMode::LocalPure(*q);
            Ok(run_prepared(spec, &prep)?.rho_out_per_input[0])
        })
        .collect::<Result<Vec<_>>>()?;
    DensityMatrix::mixture(ensemble.probs(), &outs)
}

/// Runs the loop `n` times, feeding each output back in as an improper mixture.
pub fn iterate_circuit(input: &PureQubit, n: usize, spec: &CircuitSpec) -> Result<DensityMatrix> {
    assert!(n >= 1, "at least one pass");
    let mut out = run_prepared(spec, &PreparationMode::LocalPure(*input))?.rho_out_per_input[0];
    for _ in 1..n {
        out = run_prepared(spec, &PreparationMode::ImproperMixed(out))?.rho_out_per_input[0];
    }
    Ok(out)
}

/// Analytic SWAP·CNOT pair `(ρ_out, ρ_CTC) = (diag(a²+b², 2ab), diag(a, b))`,
/// `b = 1 − a`, for an input with `|<H|ψ>|² = a`.
pub fn closed_form_swap_cnot(alpha_sq: f64) -> (DensityMatrix, DensityMatrix) {
    let a = alpha_sq.clamp(0.0, 1.0);
    let b = 1.0 - a;
    let out = DensityMatrix::new(ComplexMatrix::diag(&[a * a + b * b, 2.0 * a * b]))
        .expect("diagonal probabilities");
    let ctc = DensityMatrix::new(ComplexMatrix::diag(&[a, b])).expect("diagonal probabilities");
    (out, ctc)
}

/// Bloch vector of `ρ_CTC`, for reporting.
pub fn ctc_bloch(result: &FixedPointResult) -> BlochVector {
    bloch_from_density(&result.rho_ctc).expect("qubit state")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::make_swap;
    use crate::qmath::{density_from_bloch, PureQubit};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn dist(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
        trace_distance(a, b).unwrap()
    }

    fn cu_channel(theta: f64) -> QubitChannel {
        build_interaction(&CircuitSpec::swap_cu(theta)).unwrap()
    }

    fn cnot_channel() -> QubitChannel {
        build_interaction(&CircuitSpec::swap_cnot()).unwrap()
    }

    #[test]
    fn horizontal_input_keeps_horizontal_ctc() {
        let h = DensityMatrix::horizontal();
        for theta in [-1.2, 0.0, 0.4, FRAC_PI_4] {
            let image = consistency_map(&h, &cu_channel(theta), &h).unwrap();
            assert!(dist(&image, &h) < 1e-15);
        }
    }

    #[test]
    fn swap_only_returns_input() {
        let swap = QubitChannel::unitary(&make_swap());
        let rho_in = PureQubit::new(1.3, 0.2).density();
        for r in [
            DensityMatrix::horizontal(),
            DensityMatrix::maximally_mixed(2),
        ] {
            assert!(dist(&consistency_map(&rho_in, &swap, &r).unwrap(), &rho_in) < 1e-15);
        }
        // Constant map: M = vec(ρ_in) ⊗ vec(I)ᵀ.
        let m = superoperator(&rho_in, &swap).unwrap();
        let v = rho_in.mat().vectorize();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if j == 0 || j == 3 {
                    v[i]
                } else {
                    C64::new(0.0, 0.0)
                };
                assert!((m.get(i, j) - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn swap_cnot_map_on_maximally_mixed() {
        let rho_in = PureQubit::xz(FRAC_PI_2).density();
        let mixed = DensityMatrix::maximally_mixed(2);
        let out = consistency_map(&rho_in, &cnot_channel(), &mixed).unwrap();
        assert!(dist(&out, &mixed) < 1e-15);
    }

    #[test]
    fn superoperator_reproduces_map() {
        let rho_in = PureQubit::new(0.9, 0.3).density();
        let ch = build_interaction(&CircuitSpec::swap_cu(0.3).with_noise(0.0, 0.2)).unwrap();
        let m = superoperator(&rho_in, &ch).unwrap();
        for v in [
            BlochVector::new(0.0, 0.0, 0.0),
            BlochVector::new(0.3, -0.2, 0.5),
            BlochVector::new(0.0, 1.0, 0.0),
        ] {
            let rho = density_from_bloch(&v).unwrap();
            let direct = consistency_map(&rho_in, &ch, &rho).unwrap();
            let via = ComplexMatrix::unvectorize(2, &m.apply(&rho.mat().vectorize()));
            assert!(via.max_abs_diff(direct.mat()) < 1e-12);
        }
    }

    #[test]
    fn degenerate_swap_cnot_eigenspace() {
        let rho_in = PureQubit::xz(FRAC_PI_2).density();
        assert_eq!(fixed_set_dimension(&rho_in, &cnot_channel()).unwrap(), 2);
        let res = solve_fixed_point(&rho_in, &cnot_channel(), &SolverOptions::default()).unwrap();
        assert!(dist(&res.rho_ctc, &DensityMatrix::maximally_mixed(2)) < 1e-15);
        assert!(res.is_degenerate());
        assert!((res.entropy - 1.0).abs() < 1e-12);
        // Damped iteration from I/2 must land inside the fixed set.
        let damped = solve_fixed_point(&rho_in, &cnot_channel(), &SolverOptions::damped()).unwrap();
        assert!(damped.residual <= 1e-10);
    }

    #[test]
    fn degenerate_point_is_entropy_maximizer() {
        // Fixed set of SWAP·CNOT at |+>: diag(½,½) + c·σx for real c ∈ [−½, ½].
        let rho_in = PureQubit::xz(FRAC_PI_2).density();
        let res = solve_fixed_point(&rho_in, &cnot_channel(), &SolverOptions::default()).unwrap();
        for c in [-1e-3, 1e-3, 0.1, -0.4] {
            let other = density_from_bloch(&BlochVector::new(2.0 * c, 0.0, 0.0)).unwrap();
            let image = consistency_map(&rho_in, &cnot_channel(), &other).unwrap();
            assert!(dist(&image, &other) < 1e-14, "member of fixed set");
            assert!(von_neumann_entropy(&other).unwrap() < res.entropy);
        }
    }

    #[test]
    fn swap_cnot_ctc_state_matches_closed_form() {
        for (polar, phase) in [(0.3, 0.0), (1.0, 2.0), (2.5, 4.0), (PI, 1.0)] {
            let q = PureQubit::new(polar, phase);
            let res = solve_fixed_point(&q.density(), &cnot_channel(), &SolverOptions::default())
                .unwrap();
            let a = (0.5 * polar).cos().powi(2);
            let (_, ctc) = closed_form_swap_cnot(a);
            assert!(dist(&res.rho_ctc, &ctc) < 1e-12);
            assert!(res.residual <= 1e-10);
        }
    }

    #[test]
    fn swap_cu_horizontal_fixed_point_is_horizontal() {
        for theta in [-1.5, -0.7, 0.0, 0.5, 1.5] {
            let res = solve_fixed_point(
                &DensityMatrix::horizontal(),
                &cu_channel(theta),
                &SolverOptions::default(),
            )
            .unwrap();
            assert!(dist(&res.rho_ctc, &DensityMatrix::horizontal()) < 1e-12);
        }
    }

    #[test]
    fn optimal_gate_sends_ctc_to_vertical() {
        for k in 1..32 {
            let phi = 2.0 * PI * k as f64 / 32.0;
            let theta = 0.5 * (phi - PI);
            let res = solve_fixed_point(
                &PureQubit::xz(phi).density(),
                &cu_channel(theta),
                &SolverOptions::default(),
            )
            .unwrap();
            assert!(
                dist(&res.rho_ctc, &DensityMatrix::vertical()) < 1e-10,
                "k = {k}"
            );
            assert!(res.residual <= 1e-10);
        }
    }

    #[test]
    fn evolve_output_examples() {
        let ch = cnot_channel();
        for (polar, phase) in [(0.4, 0.0), (1.2, 3.0), (2.0, 5.5)] {
            let q = PureQubit::new(polar, phase);
            let a = (0.5 * polar).cos().powi(2);
            let (out, ctc) = closed_form_swap_cnot(a);
            let got = evolve_output(&q.density(), &ctc, &ch).unwrap();
            assert!(dist(&got, &out) < 1e-14);
        }
        let (half_out, _) = closed_form_swap_cnot(0.5);
        assert!(dist(&half_out, &DensityMatrix::maximally_mixed(2)) < 1e-15);

        let phi = 1.1;
        let cu = cu_channel(0.5 * (phi - PI));
        let v = evolve_output(
            &PureQubit::xz(phi).density(),
            &DensityMatrix::vertical(),
            &cu,
        )
        .unwrap();
        assert!(dist(&v, &DensityMatrix::vertical()) < 1e-14);
        let h = evolve_output(
            &DensityMatrix::horizontal(),
            &DensityMatrix::horizontal(),
            &cu,
        )
        .unwrap();
        assert!(dist(&h, &DensityMatrix::horizontal()) < 1e-14);
    }

    #[test]
    fn local_pure_discrimination_at_optimum() {
        let spec = CircuitSpec::swap_cu(FRAC_PI_4);
        let o0 = run_prepared(&spec, &PreparationMode::LocalPure(PureQubit::horizontal())).unwrap();
        let o1 = run_prepared(&spec, &PreparationMode::LocalPure(PureQubit::xz(1.5 * PI))).unwrap();
        assert!(dist(&o0.rho_out_per_input[0], &DensityMatrix::horizontal()) < 1e-12);
        assert!(dist(&o1.rho_out_per_input[0], &DensityMatrix::vertical()) < 1e-12);
        assert!(o0.consistency_fidelity >= 1.0 - 1e-9);
        assert!(o1.consistency_fidelity >= 1.0 - 1e-9);
    }

    #[test]
    fn non_local_preparation_maps_to_maximally_mixed() {
        let spec = CircuitSpec::swap_cu(FRAC_PI_4);
        let prep = PreparationMode::non_local(
            vec![PureQubit::horizontal(), PureQubit::xz(1.5 * PI)],
            vec![0.5, 0.5],
        )
        .unwrap();
        let out = run_prepared(&spec, &prep).unwrap();
        assert_eq!(out.rho_out_per_input.len(), 2);
        for rho in &out.rho_out_per_input {
            assert!(dist(rho, &DensityMatrix::maximally_mixed(2)) < 1e-12);
        }
        // Conditioning on the steered state gives the same answer at the optimum.
        let steered = run_scenario(
            &spec,
            &prep,
            &[
                DensityMatrix::horizontal(),
                PureQubit::xz(1.5 * PI).density(),
            ],
        )
        .unwrap();
        for rho in &steered.rho_out_per_input {
            assert!(dist(rho, &DensityMatrix::maximally_mixed(2)) < 1e-12);
        }
    }

    #[test]
    fn ensemble_validation() {
        assert!(Ensemble::new(vec![PureQubit::horizontal()], vec![0.9]).is_err());
        assert!(Ensemble::new(vec![PureQubit::horizontal(); 2], vec![1.5, -0.5]).is_err());
        assert!(Ensemble::new(vec![], vec![]).is_err());
        assert!(Ensemble::new(vec![PureQubit::horizontal(); 2], vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn iterated_swap_cnot_circuit() {
        let q = PureQubit::xz(FRAC_PI_4);
        let spec = CircuitSpec::swap_cnot();
        let expected = [0.75, 0.625, 0.53125];
        for (n, a) in expected.iter().enumerate() {
            let out = iterate_circuit(&q, n + 1, &spec).unwrap();
            assert!(
                dist(&out, &DensityMatrix::diag2(*a).unwrap()) < 1e-12,
                "n = {}",
                n + 1
            );
        }
    }

    #[test]
    fn closed_form_examples() {
        let (out, ctc) = closed_form_swap_cnot(1.0);
        assert_eq!(out, DensityMatrix::horizontal());
        assert_eq!(ctc, DensityMatrix::horizontal());
        let (out, ctc) = closed_form_swap_cnot(0.5);
        assert!(dist(&out, &DensityMatrix::maximally_mixed(2)) < 1e-15);
        assert!(dist(&ctc, &DensityMatrix::maximally_mixed(2)) < 1e-15);
        let a = (PI / 8.0).cos().powi(2);
        let (out, ctc) = closed_form_swap_cnot(a);
        assert!((out.mat().get(0, 0).re - 0.75).abs() < 1e-15);
        assert!((ctc.mat().get(0, 0).re - 0.853_553_390_593_273_7).abs() < 1e-15);
    }

    #[test]
    fn proper_and_improper_mixtures_differ() {
        let spec = CircuitSpec::swap_cnot();
        let ens = Ensemble::uniform(vec![PureQubit::horizontal(), PureQubit::xz(PI)]).unwrap();
        let proper = proper_mixture_output(&spec, &ens).unwrap();
        // Each pole maps to |H> shot by shot; the improper mixture I/2 stays I/2.
        assert!(dist(&proper, &DensityMatrix::horizontal()) < 1e-12);
        let improper = run_prepared(&spec, &PreparationMode::ImproperMixed(ens.mixture())).unwrap();
        assert!(
            dist(
                &improper.rho_out_per_input[0],
                &DensityMatrix::maximally_mixed(2)
            ) < 1e-12
        );
    }

    #[test]
    fn damped_iteration_reports_non_convergence() {
        let opts = SolverOptions {
            max_iter: 3,
            ..SolverOptions::damped()
        };
        let err =
            solve_fixed_point(&PureQubit::xz(0.3).density(), &cu_channel(0.2), &opts).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { iterations: 3, .. }));
    }

    #[test]
    fn phase_is_erased_by_swap_cnot_circuit() {
        let spec = CircuitSpec::swap_cnot();
        for polar in [FRAC_PI_4, FRAC_PI_2, 2.0] {
            let reference = iterate_circuit(&PureQubit::new(polar, 0.0), 1, &spec).unwrap();
            for k in 1..16 {
                let phase = 2.0 * PI * k as f64 / 16.0;
                let out = iterate_circuit(&PureQubit::new(polar, phase), 1, &spec).unwrap();
                assert!(dist(&out, &reference) < 1e-10);
            }
        }
    }
}
