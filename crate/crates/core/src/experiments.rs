//! Figure reproductions as flat lists of [`SweepRecord`]s, plus the noise
//! thresholds. Grid points are evaluated in parallel and returned in grid order.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::{depolarize, CircuitSpec};
use crate::deutsch::{run_prepared, PreparationMode};
use crate::measures::{l_measure, optimal_l, qm_baseline, MeasurementDirection};
use crate::qmath::{trace_distance, DensityMatrix, PureQubit};
use crate::{tol, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrepMode {
    LocalPure,
    NonLocal,
}

impl PrepMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PrepMode::LocalPure => "local_pure",
            PrepMode::NonLocal => "non_local",
        }
    }
}

/// One-dimensional cuts through the (φ, θ) plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Fig5Variant {
    /// θ = (φ − π)/2 for every φ.
    OptimalGate,
    FixedState {
        phi: f64,
    },
    FixedGate {
        theta_xz: f64,
    },
}

impl Fig5Variant {
    pub const FIXED_STATE: Fig5Variant = Fig5Variant::FixedState { phi: 1.5 * PI };
    pub const FIXED_GATE: Fig5Variant = Fig5Variant::FixedGate {
        theta_xz: FRAC_PI_4,
    };

    pub fn label(&self) -> &'static str {
        match self {
            Fig5Variant::OptimalGate => "optimal_gate",
            Fig5Variant::FixedState { .. } => "fixed_state",
            Fig5Variant::FixedGate { .. } => "fixed_gate",
        }
    }
}

/// Flat output row shared by every experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub experiment_id: String,
    pub phi: f64,
    pub phase: f64,
    /// Absent for the SWAP·CNOT circuit.
    pub theta_xz: Option<f64>,
    pub p: f64,
    pub epsilon: f64,
    pub prep_mode: PrepMode,
    pub n_iterations: usize,
    #[serde(rename = "L_ctc_sigma_z")]
    pub l_ctc_sigma_z: f64,
    #[serde(rename = "L_ctc_optimal")]
    pub l_ctc_optimal: f64,
    #[serde(rename = "D_ctc")]
    pub d_ctc: f64,
    #[serde(rename = "L_qm")]
    pub l_qm: f64,
    #[serde(rename = "D_qm")]
    pub d_qm: f64,
    pub p_succ_ctc: f64,
    pub p_succ_qm: f64,
    pub fixed_point_residual: f64,
    pub consistency_fidelity: f64,
    pub fixed_set_dimension: usize,
}

impl SweepRecord {
    pub const FIELDS: [&'static str; 18] = [
        "experiment_id",
        "phi",
        "phase",
        "theta_xz",
        "p",
        "epsilon",
        "prep_mode",
        "n_iterations",
        "L_ctc_sigma_z",
        "L_ctc_optimal",
        "D_ctc",
        "L_qm",
        "D_qm",
        "p_succ_ctc",
        "p_succ_qm",
        "fixed_point_residual",
        "consistency_fidelity",
        "fixed_set_dimension",
    ];

    pub fn is_degenerate(&self) -> bool {
        self.fixed_set_dimension > 1
    }

    /// Residual, consistency-fidelity and probability-range checks.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if !(self.fixed_point_residual <= tol::RESIDUAL) {
            return Err(format!("residual {:e}", self.fixed_point_residual));
        }
        if !(self.consistency_fidelity >= 1.0 - tol::FIDELITY_GAP) {
            return Err(format!(
                "consistency fidelity {}",
                self.consistency_fidelity
            ));
        }
        let probs = [
            ("L_ctc_sigma_z", self.l_ctc_sigma_z),
            ("L_ctc_optimal", self.l_ctc_optimal),
            ("D_ctc", self.d_ctc),
            ("L_qm", self.l_qm),
            ("D_qm", self.d_qm),
            ("p_succ_ctc", self.p_succ_ctc),
            ("p_succ_qm", self.p_succ_qm),
        ];
        for (name, v) in probs {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} = {v} outside [0, 1]"));
            }
        }
        Ok(())
    }
}

/// Worst-case diagnostics over the loop runs behind one record.
#[derive(Clone, Copy, Debug)]
struct Diagnostics {
    residual: f64,
    fidelity: f64,
    dimension: usize,
}

impl Diagnostics {
    fn new() -> Self {
        Diagnostics {
            residual: 0.0,
            fidelity: 1.0,
            dimension: 0,
        }
    }

    fn absorb(&mut self, out: &crate::deutsch::ScenarioOutput) {
        self.residual = self.residual.max(out.fixed_point.residual);
        self.fidelity = self.fidelity.min(out.consistency_fidelity);
        self.dimension = self.dimension.max(out.fixed_point.fixed_set_dimension);
    }
}

/// `φ_k = 2πk/n`, `k = 0..n`.
pub fn phi_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

/// `θ_k = −π/2 + πk/n`, `k = 0..n`.
pub fn theta_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| -FRAC_PI_2 + PI * k as f64 / n as f64)
        .collect()
}

/// `n` evenly spaced points on `[0, 1]`, endpoints included.
pub fn unit_grid(n: usize) -> Vec<f64> {
    assert!(n >= 2, "grid needs at least two points");
    (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
}

/// The fourteen SWAP·CNOT inputs `(φ, ϕ)`: both poles, and three polar angles at
/// four phases each.
pub fn fig3_states() -> Vec<(f64, f64)> {
    let mut states = vec![(0.0, 0.0)];
    for polar in [FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4] {
        for k in 0..4 {
            states.push((polar, k as f64 * FRAC_PI_2));
        }
    }
    states.push((PI, 0.0));
    states
}

fn iterate_tracked(
    input: &PureQubit,
    n: usize,
    spec: &CircuitSpec,
    diag: &mut Diagnostics,
) -> Result<DensityMatrix> {
    let run = run_prepared(spec, &PreparationMode::LocalPure(*input))?;
    diag.absorb(&run);
    let mut out = run.rho_out_per_input[0];
    for _ in 1..n {
        let run = run_prepared(spec, &PreparationMode::ImproperMixed(out))?;
        diag.absorb(&run);
        out = run.rho_out_per_input[0];
    }
    Ok(out)
}

/// SWAP·CNOT evolution of `ψ(φ, ϕ)` against the reference `|H⟩`.
///
/// The standard-QM ℒ here uses the σ_z axis, like the CTC side, since that is
/// the comparison plotted for this circuit.
pub fn fig3_sweep(
    phi_grid: &[f64],
    phase_grid: &[f64],
    iterations: &[usize],
) -> Result<Vec<SweepRecord>> {
    let spec = CircuitSpec::swap_cnot();
    let points: Vec<(f64, f64, usize)> = phi_grid
        .iter()
        .flat_map(|&phi| {
            phase_grid
                .iter()
                .flat_map(move |&phase| iterations.iter().map(move |&n| (phi, phase, n)))
        })
        .collect();
    points
        .par_iter()
        .map(|&(phi, phase, n)| fig3_point(&spec, phi, phase, n))
        .collect()
}

fn fig3_point(spec: &CircuitSpec, phi: f64, phase: f64, n: usize) -> Result<SweepRecord> {
    let mut diag = Diagnostics::new();
    let psi = PureQubit::new(phi, phase);
    let reference = PureQubit::horizontal();
    let out_ref = iterate_tracked(&reference, n.max(1), spec, &mut diag)?;
    let out_psi = iterate_tracked(&psi, n.max(1), spec, &mut diag)?;
    let z = MeasurementDirection::sigma_z();
    let (in_ref, in_psi) = (reference.density(), psi.density());
    let d_ctc = trace_distance(&out_ref, &out_psi)?;
    let d_qm = trace_distance(&in_ref, &in_psi)?;
    Ok(SweepRecord {
        experiment_id: "fig3".into(),
        phi,
        phase,
        theta_xz: None,
        p: 0.0,
        epsilon: 0.0,
        prep_mode: PrepMode::LocalPure,
        n_iterations: n,
        l_ctc_sigma_z: l_measure(&out_ref, &out_psi, &z)?,
        l_ctc_optimal: optimal_l(&out_ref, &out_psi)?.0,
        d_ctc,
        l_qm: l_measure(&in_ref, &in_psi, &z)?,
        d_qm,
        p_succ_ctc: 0.5 * (1.0 + d_ctc),
        p_succ_qm: 0.5 * (1.0 + d_qm),
        fixed_point_residual: diag.residual,
        consistency_fidelity: diag.fidelity,
        fixed_set_dimension: diag.dimension,
    })
}

/// Discrimination of `{|H⟩, ψ(φ)}` through `CU_xz(θ)·SWAP` with noise.
///
/// The standard-QM side uses the measurement axis that is optimal for the
/// noise-free pair; depolarisation only shrinks Bloch vectors, so that axis
/// remains optimal.
pub fn discriminate(
    experiment_id: &str,
    mode: PrepMode,
    phi: f64,
    theta_xz: f64,
    p: f64,
    epsilon: f64,
) -> Result<SweepRecord> {
    let spec = CircuitSpec::swap_cu(theta_xz).with_noise(p, epsilon);
    spec.validate()?;
    let psi0 = PureQubit::horizontal();
    let psi1 = PureQubit::xz(phi);
    let mut diag = Diagnostics::new();
    let (out0, out1) = match mode {
        PrepMode::LocalPure => {
            let r0 = run_prepared(&spec, &PreparationMode::LocalPure(psi0))?;
            let r1 = run_prepared(&spec, &PreparationMode::LocalPure(psi1))?;
            diag.absorb(&r0);
            diag.absorb(&r1);
            (r0.rho_out_per_input[0], r1.rho_out_per_input[0])
        }
        PrepMode::NonLocal => {
            let prep = PreparationMode::non_local(vec![psi0, psi1], vec![0.5, 0.5])?;
            let r = run_prepared(&spec, &prep)?;
            diag.absorb(&r);
            (r.rho_out_per_input[0], r.rho_out_per_input[1])
        }
    };

    let qm_axis = qm_baseline(phi, 0.0)?.optimal_axis;
    let in0 = depolarize(&psi0.density(), p)?;
    let in1 = depolarize(&psi1.density(), p)?;
    let d_ctc = trace_distance(&out0, &out1)?;
    let d_qm = trace_distance(&in0, &in1)?;
    Ok(SweepRecord {
        experiment_id: experiment_id.to_string(),
        phi,
        phase: 0.0,
        theta_xz: Some(theta_xz),
        p,
        epsilon,
        prep_mode: mode,
        n_iterations: 1,
        l_ctc_sigma_z: l_measure(&out0, &out1, &MeasurementDirection::sigma_z())?,
        l_ctc_optimal: optimal_l(&out0, &out1)?.0,
        d_ctc,
        l_qm: l_measure(&in0, &in1, &qm_axis)?,
        d_qm,
        p_succ_ctc: 0.5 * (1.0 + d_ctc),
        p_succ_qm: 0.5 * (1.0 + d_qm),
        fixed_point_residual: diag.residual,
        consistency_fidelity: diag.fidelity,
        fixed_set_dimension: diag.dimension,
    })
}

fn run_points(id: &str, mode: PrepMode, points: &[(f64, f64)]) -> Result<Vec<SweepRecord>> {
    points
        .par_iter()
        .map(|&(phi, theta)| discriminate(id, mode, phi, theta, 0.0, 0.0))
        .collect()
}

/// Cut through the (φ, θ) plane. φ runs over `[0, 2π)` for the gate variants,
/// θ over `[−π/2, π/2)` for the fixed state.
pub fn fig5_sweep(
    mode: PrepMode,
    variant: Fig5Variant,
    grid_size: usize,
) -> Result<Vec<SweepRecord>> {
    check_grid(grid_size)?;
    let points: Vec<(f64, f64)> = match variant {
        Fig5Variant::OptimalGate => phi_grid(grid_size)
            .into_iter()
            .map(|phi| (phi, 0.5 * (phi - PI)))
            .collect(),
        Fig5Variant::FixedGate { theta_xz } => phi_grid(grid_size)
            .into_iter()
            .map(|phi| (phi, theta_xz))
            .collect(),
        Fig5Variant::FixedState { phi } => theta_grid(grid_size)
            .into_iter()
            .map(|t| (phi, t))
            .collect(),
    };
    let id = format!("fig5/{}/{}", variant.label(), mode.as_str());
    run_points(&id, mode, &points)
}

/// Full (φ, θ) surface, φ-major.
pub fn fig5_surface(mode: PrepMode, n_phi: usize, n_theta: usize) -> Result<Vec<SweepRecord>> {
    check_grid(n_phi)?;
    check_grid(n_theta)?;
    let thetas = theta_grid(n_theta);
    let points: Vec<(f64, f64)> = phi_grid(n_phi)
        .into_iter()
        .flat_map(|phi| thetas.iter().map(move |&t| (phi, t)))
        .collect();
    run_points(&format!("fig5/surface/{}", mode.as_str()), mode, &points)
}

fn check_grid(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::OutOfRange {
            name: "grid size",
            value: n as f64,
            lo: 2.0,
            hi: f64::INFINITY,
        });
    }
    Ok(())
}

pub const FIG6_PHI: f64 = 1.5 * PI;
pub const FIG6_THETA: f64 = FRAC_PI_4;

/// Noise surface at the working point φ = 3π/2, θ = π/4, local preparation,
/// p-major.
pub fn fig6_surface(p_grid: &[f64], eps_grid: &[f64]) -> Result<Vec<SweepRecord>> {
    let points: Vec<(f64, f64)> = p_grid
        .iter()
        .flat_map(|&p| eps_grid.iter().map(move |&e| (p, e)))
        .collect();
    points
        .par_iter()
        .map(|&(p, e)| discriminate("fig6", PrepMode::LocalPure, FIG6_PHI, FIG6_THETA, p, e))
        .collect()
}

/// Same cuts as [`fig5_sweep`]; the optimal-measurement CTC values live in
/// `L_ctc_optimal`.
pub fn supp_s1_sweep(
    mode: PrepMode,
    variant: Fig5Variant,
    grid_size: usize,
) -> Result<Vec<SweepRecord>> {
    relabel(fig5_sweep(mode, variant, grid_size)?, "s1")
}

/// Same cuts as [`fig5_sweep`]; the identification probabilities live in
/// `p_succ_ctc` and `p_succ_qm`.
pub fn supp_s2_sweep(
    mode: PrepMode,
    variant: Fig5Variant,
    grid_size: usize,
) -> Result<Vec<SweepRecord>> {
    relabel(fig5_sweep(mode, variant, grid_size)?, "s2")
}

fn relabel(mut records: Vec<SweepRecord>, prefix: &str) -> Result<Vec<SweepRecord>> {
    for r in &mut records {
        r.experiment_id = r.experiment_id.replacen("fig5", prefix, 1);
    }
    Ok(records)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseParameter {
    P,
    Epsilon,
}

impl NoiseParameter {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseParameter::P => "p",
            NoiseParameter::Epsilon => "epsilon",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub parameter: NoiseParameter,
    pub crossing: f64,
    pub bracket: (f64, f64),
    /// Width of the final bracket.
    pub achieved_tolerance: f64,
    /// CTC-minus-QM difference at `crossing`.
    pub residual: f64,
}

/// `L_ctc(x) − L_qm(x)` along one noise axis of the noise surface.
pub fn advantage(parameter: NoiseParameter, x: f64) -> Result<f64> {
    let (p, eps) = match parameter {
        NoiseParameter::P => (x, 0.0),
        NoiseParameter::Epsilon => (0.0, x),
    };
    let r = discriminate(
        "threshold",
        PrepMode::LocalPure,
        FIG6_PHI,
        FIG6_THETA,
        p,
        eps,
    )?;
    Ok(r.l_ctc_sigma_z - r.l_qm)
}

/// First point in `[0, 1]` where the CTC advantage is lost, located by a
/// coarse scan then bisection.
///
/// The scan is needed because both curves meet again at full noise.
pub fn find_threshold(parameter: NoiseParameter) -> Result<ThresholdResult> {
    const SCAN: usize = 64;
    let f = |x: f64| advantage(parameter, x);
    let mut lo = 0.0;
    let mut f_lo = f(lo)?;
    if f_lo <= 0.0 {
        return Err(Error::NoCrossing(parameter.as_str()));
    }
    let mut hi = None;
    for k in 1..=SCAN {
        let x = k as f64 / SCAN as f64;
        let fx = f(x)?;
        if fx <= 0.0 {
            hi = Some(x);
            break;
        }
        lo = x;
        f_lo = fx;
    }
    let Some(mut hi) = hi else {
        return Err(Error::NoCrossing(parameter.as_str()));
    };
    debug_assert!(f_lo > 0.0);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let crossing = 0.5 * (lo + hi);
    Ok(ThresholdResult {
        parameter,
        crossing,
        bracket: (lo, hi),
        achieved_tolerance: hi - lo,
        residual: f(crossing)?,
    })
}

/// Grid sizes for [`reproduce`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridConfig {
    pub n_phi: usize,
    pub n_theta: usize,
    pub n_noise: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n_phi: 32,
            n_theta: 64,
            n_noise: 41,
        }
    }
}

impl GridConfig {
    /// One size for every axis; θ gets twice the φ resolution.
    pub fn uniform(n: usize) -> Self {
        GridConfig {
            n_phi: n,
            n_theta: 2 * n,
            n_noise: n,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Fig3,
    Fig5a,
    Fig5b,
    Fig5c,
    Fig6,
    S1,
    S2,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Fig3 => "fig3",
            Target::Fig5a => "fig5a",
            Target::Fig5b => "fig5b",
            Target::Fig5c => "fig5c",
            Target::Fig6 => "fig6",
            Target::S1 => "s1",
            Target::S2 => "s2",
        }
    }
}

fn panel(mode: PrepMode, grid: &GridConfig) -> Result<Vec<SweepRecord>> {
    let mut records = fig5_sweep(mode, Fig5Variant::OptimalGate, grid.n_phi)?;
    records.extend(fig5_surface(mode, grid.n_phi, grid.n_theta)?);
    Ok(records)
}

fn cross_sections(grid: &GridConfig) -> Result<Vec<SweepRecord>> {
    let mut records = Vec::new();
    for mode in [PrepMode::LocalPure, PrepMode::NonLocal] {
        records.extend(fig5_sweep(mode, Fig5Variant::FIXED_STATE, grid.n_theta)?);
        records.extend(fig5_sweep(mode, Fig5Variant::FIXED_GATE, grid.n_phi)?);
    }
    Ok(records)
}

/// Records behind one figure.
pub fn reproduce(target: Target, grid: &GridConfig) -> Result<Vec<SweepRecord>> {
    match target {
        Target::Fig3 => {
            let mut records = Vec::new();
            for (phi, phase) in fig3_states() {
                records.extend(fig3_sweep(&[phi], &[phase], &[1, 2, 3, 4, 5])?);
            }
            Ok(records)
        }
        Target::Fig5a => panel(PrepMode::LocalPure, grid),
        Target::Fig5b => panel(PrepMode::NonLocal, grid),
        Target::Fig5c => cross_sections(grid),
        Target::Fig6 => fig6_surface(&unit_grid(grid.n_noise), &unit_grid(grid.n_noise)),
        Target::S1 | Target::S2 => {
            let mut records = panel(PrepMode::LocalPure, grid)?;
            records.extend(panel(PrepMode::NonLocal, grid)?);
            records.extend(cross_sections(grid)?);
            relabel(records, target.name())
        }
    }
}
