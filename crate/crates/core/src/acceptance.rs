//! End-to-end acceptance checks, shared by the `selftest` command and the
//! acceptance test target. Every reference value is computed here from an
//! independent closed form or search, never from the engine under test.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuits::{build_interaction, CircuitSpec};
use crate::deutsch::{
    closed_form_swap_cnot, pauli_transfer, run_prepared, solve_fixed_point, PreparationMode,
    SolverOptions,
};
use crate::experiments::{
    fig3_sweep, fig5_surface, fig5_sweep, fig6_surface, find_threshold, supp_s1_sweep, unit_grid,
    Fig5Variant, NoiseParameter, PrepMode, SweepRecord,
};
use crate::measures::{l_measure, optimal_l, p_success, HelstromMeasurement, MeasurementDirection};
use crate::qmath::{
    density_from_bloch, singular_values, trace_distance, BlochVector, DensityMatrix, PureQubit,
};
use crate::Result;

const SEED: u64 = 0x5eed_c7c0;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AcceptanceConfig {
    /// Replaces every pinned tolerance when set.
    pub tol_override: Option<f64>,
}

impl AcceptanceConfig {
    fn tol(&self, pinned: f64) -> f64 {
        self.tol_override.unwrap_or(pinned)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    /// Tolerance the check ran at (the tightest one for multi-part checks).
    pub tolerance: f64,
    /// Largest observed deviation, in the same units as `tolerance`.
    pub worst: f64,
    pub detail: String,
    pub elapsed: Duration,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {:>2} {:<28} tol={:.0e} worst={:.3e} ({:.2?}) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.tolerance,
            self.worst,
            self.elapsed,
            self.detail
        )
    }
}

/// Running record of one check: worst deviation and first failure message.
struct Check {
    tolerance: f64,
    worst: f64,
    failure: Option<String>,
    notes: Vec<String>,
}

impl Check {
    fn new(tolerance: f64) -> Self {
        Check {
            tolerance,
            worst: 0.0,
            failure: None,
            notes: Vec::new(),
        }
    }

    /// Records `|got − want| ≤ tol`.
    fn close(&mut self, what: impl FnOnce() -> String, got: f64, want: f64, tol: f64) {
        self.within(what, (got - want).abs(), tol);
    }

    fn within(&mut self, what: impl FnOnce() -> String, deviation: f64, tol: f64) {
        if deviation.is_finite() {
            self.worst = self.worst.max(deviation);
        }
        if !(deviation <= tol) && self.failure.is_none() {
            self.failure = Some(format!("{}: deviation {deviation:.3e} > {tol:.0e}", what()));
        }
    }

    fn require(&mut self, what: impl FnOnce() -> String, ok: bool) {
        if !ok && self.failure.is_none() {
            self.failure = Some(what());
        }
    }

    fn note(&mut self, s: String) {
        self.notes.push(s);
    }
}

/// Consistency fidelities gathered from the scenarios of criteria 1–9.
#[derive(Default)]
struct FidelityLog {
    worst: Option<f64>,
    count: usize,
}

impl FidelityLog {
    fn push(&mut self, f: f64) {
        self.worst = Some(self.worst.map_or(f, |w| w.min(f)));
        self.count += 1;
    }

    fn records(&mut self, records: &[SweepRecord]) {
        for r in records {
            self.push(r.consistency_fidelity);
        }
    }
}

pub const NAMES: [&str; 11] = [
    "closed-form oracle",
    "phase erasure",
    "degenerate fixed point",
    "fig3 region",
    "fig3 inset",
    "fig5a perfect discrimination",
    "fig5b non-local bound",
    "fig6 thresholds",
    "supplement identities",
    "solver equivalence",
    "consistency fidelity",
];

fn input_for_alpha_sq(a: f64) -> PureQubit {
    PureQubit::xz(2.0 * a.sqrt().clamp(0.0, 1.0).acos())
}

fn c1(cfg: &AcceptanceConfig, log: &mut FidelityLog) -> Result<Check> {
    let tol = cfg.tol(1e-10);
    let mut c = Check::new(tol);
    let spec = CircuitSpec::swap_cnot();
    let start = Instant::now();
    for k in 0..64 {
        let a = k as f64 / 63.0;
        let out = run_prepared(&spec, &PreparationMode::LocalPure(input_for_alpha_sq(a)))?;
        log.push(out.consistency_fidelity);
        // diag(a² + b², 2ab) and diag(a, b), written out independently.
        let b = 1.0 - a;
        let want_out = DensityMatrix::diag2(a * a + b * b)?;
        let want_ctc = DensityMatrix::diag2(a)?;
        let d_out = trace_distance(&out.rho_out_per_input[0], &want_out)?;
        let d_ctc = trace_distance(&out.fixed_point.rho_ctc, &want_ctc)?;
        c.within(|| format!("rho_out at a={a}"), d_out, tol);
        c.within(|| format!("rho_ctc at a={a}"), d_ctc, tol);
        let (closed_out, closed_ctc) = closed_form_swap_cnot(a);
        c.within(
            || format!("closed form at a={a}"),
            trace_distance(&closed_out, &want_out)?,
            tol,
        );
        c.within(
            || format!("closed form at a={a}"),
            trace_distance(&closed_ctc, &want_ctc)?,
            tol,
        );
    }
    let elapsed = start.elapsed();
    c.require(
        || format!("runtime {elapsed:.2?} exceeds 1 s"),
        elapsed < Duration::from_secs(1),
    );
    Ok(c)
}

fn c2(cfg: &AcceptanceConfig, log: &mut FidelityLog) -> Result<Check> {
    let tol = cfg.tol(1e-10);
    let mut c = Check::new(tol);
    let spec = CircuitSpec::swap_cnot();
    for j in 1..=5 {
        let polar = j as f64 * PI / 6.0;
        let outs = (0..16)
            .map(|k| {
                let phase = 2.0 * PI * k as f64 / 16.0;
                let r = run_prepared(
                    &spec,
                    &PreparationMode::LocalPure(PureQubit::new(polar, phase)),
                )?;
                log.push(r.consistency_fidelity);
                Ok(r.rho_out_per_input[0])
            })
            .collect::<Result<Vec<_>>>()?;
        for a in 0..outs.len() {
            for b in a + 1..outs.len() {
                c.within(
                    || format!("polar {polar}, phases {a} vs {b}"),
                    trace_distance(&outs[a], &outs[b])?,
                    tol,
                );
            }
        }
    }
    Ok(c)
}

fn c3(cfg: &AcceptanceConfig, log: &mut FidelityLog) -> Result<Check> {
    let tol = cfg.tol(1e-10);
    let mut c = Check::new(tol);
    let out = run_prepared(
        &CircuitSpec::swap_cnot(),
        &PreparationMode::LocalPure(PureQubit::xz(FRAC_PI_2)),
    )?;
    log.push(out.consistency_fidelity);
    let dim = out.fixed_point.fixed_set_dimension;
    c.require(|| format!("fixed_set_dimension = {dim}, want 2"), dim == 2);
    let d = trace_distance(&out.fixed_point.rho_ctc, &DensityMatrix::maximally_mixed(2))?;
    c.within(|| "rho_ctc vs diag(1/2, 1/2)".into(), d, tol);
    Ok(c)
}

fn c4(cfg: &AcceptanceConfig, log: &mut FidelityLog) -> Result<Check> {
    let tol = cfg.tol(1e-10);
    let mut c = Check::new(tol);
    let grid: Vec<f64> = (0..=32).map(|k| k as f64 * PI / 16.0).collect();
    let records = fig3_sweep(&grid, &[0.0], &[1])?;
    log.records(&records);
    for (k, r) in records.iter().enumerate() {
        let phi = r.phi;
        c.close(
            || format!("L_ctc at phi={phi}"),
            r.l_ctc_sigma_z,
            0.5 * phi.sin().powi(2),
            tol,
        );
        c.close(
            || format!("D_ctc at phi={phi}"),
            r.d_ctc,
            0.5 * phi.sin().powi(2),
            tol,
        );
        c.close(
            || format!("L_qm at phi={phi}"),
            r.l_qm,
            (0.5 * phi).sin().powi(2),
            tol,
        );
        if (1..=15).contains(&k) {
            let diff = r.l_ctc_sigma_z - r.l_qm;
            if k == 8 {
                c.within(|| "boundary equality at phi=pi/2".into(), diff.abs(), tol);
            } else {
                let advantage = diff > tol;
                c.require(
                    || format!("advantage at phi={phi} is {advantage}, want {}", k < 8),
                    advantage == (k < 8),
                );
            }
        }
    }
    Ok(c)
}

fn c5(cfg: &AcceptanceConfig, log: &mut FidelityLog) -> Result<Check> {
    let tol = cfg.tol(1e-10);
    let mut c = Check::new(tol);
    let records = fig3_sweep(&[FRAC_PI_4], &[0.0], &[1, 2, 3, 4, 5])?;
    log.records(&records);
    // Populations evolve as a ← a² + (1−a)² and the distance to |H> is 1 − a.
    let mut a = (PI / 8.0).cos().powi(2);
    let d_qm = (PI / 8.0).sin();
    for r in &records {
        a = a * a + (1.0 - a) * (1.0 - a);
        let n = r.n_iterations;
        c.close(|| format!("D_ctc(n={n})"), r.d_ctc, 1.0 - a, tol);
        c.close(|| "D_qm".into(), r.d_qm, d_qm, tol);
    }
    let (d2, d3) = (records[1].d_ctc, records[2].d_ctc);
    c.close(|| "D_ctc(n=2) vs 0.375".into(), d2, 0.375, tol);
    c.close(|| "D_ctc(n=3) vs 0.46875".into(), d3, 0.46875, tol);
    c.require(
        || format!("ordering {d2} < {d_qm} < {d3} violated"),
        d2 < d_qm && d_qm < d3,
    );
    Ok(c)
}

fn c6(cfg: &AcceptanceConfig, log: &mut FidelityLog) -> Result<Check> {
    let tol = cfg.tol(1e-9);
    let mut c = Check::new(tol);
    let records = fig5_sweep(PrepMode::LocalPure, Fig5Variant::OptimalGate, 32)?;
    log.records(&records[1..]);
    for r in &records[1..] {
        let phi = r.phi;
        c.close(|| format!("L_ctc at phi={phi}"), r.l_ctc_sigma_z, 1.0, tol);
        c.require(
            || format!("residual {:e} at phi={phi}", r.fixed_point_residual),
            r.fixed_point_residual <= cfg.tol(1e-10),
        );
    }
    Ok(c)
}

fn c7(cfg: &AcceptanceConfig, log: &mut FidelityLog) -> Result<Check> {
    let tol_state = cfg.tol(1e-10);
    let tol_bound = cfg.tol(1e-9);
    let mut c = Check::new(tol_state);
    let mixed = DensityMatrix::maximally_mixed(2);
    let spec = |phi: f64| CircuitSpec::swap_cu(0.5 * (phi - PI));
    for k in 1..32 {
        let phi = 2.0 * PI * k as f64 / 32.0;
        let prep = PreparationMode::non_local(
            vec![PureQubit::horizontal(), PureQubit::xz(phi)],
            vec![0.5, 0.5],
        )?;
        let out = run_prepared(&spec(phi), &prep)?;
        log.push(out.consistency_fidelity);
        for rho in &out.rho_out_per_input {
            c.within(
                || format!("output vs I/2 at phi={phi}"),
                trace_distance(rho, &mixed)?,
                tol_state,
            );
        }
        let l = l_measure(
            &out.rho_out_per_input[0],
            &out.rho_out_per_input[1],
            &MeasurementDirection::sigma_z(),
        )?;
        c.close(|| format!("L at phi={phi}"), l, 0.5, tol_state);
    }
    let mut surface = fig5_surface(PrepMode::NonLocal, 32, 64)?;
    surface.extend(fig5_sweep(
        PrepMode::NonLocal,
        Fig5Variant::FIXED_STATE,
        64,
    )?);
    surface.extend(fig5_sweep(PrepMode::NonLocal, Fig5Variant::FIXED_GATE, 32)?);
    log.records(&surface);
    for r in &surface {
        let excess = (r.l_ctc_sigma_z - 0.5).max(0.0);
        c.within(
            || format!("L bound at phi={}, theta={:?}", r.phi, r.theta_xz),
            excess,
            tol_bound,
        );
    }
    c.note(format!("{} off-optimum points", surface.len()));
    Ok(c)
}

fn c8(cfg: &AcceptanceConfig, log: &mut FidelityLog) -> Result<Check> {
    let tol = cfg.tol(1e-6);
    let mut c = Check::new(tol);
    let start = Instant::now();
    let grid = unit_grid(41);
    let surface = fig6_surface(&grid, &grid)?;
    let p = find_threshold(NoiseParameter::P)?;
    let e = find_threshold(NoiseParameter::Epsilon)?;
    let elapsed = start.elapsed();
    log.records(&surface);
    c.close(|| "p*".into(), p.crossing, SQRT_2 - 1.0, tol);
    c.close(|| "eps*".into(), e.crossing, 1.0 / 3.0, tol);
    c.within(|| "f(p*)".into(), p.residual.abs(), cfg.tol(1e-9));
    c.within(|| "f(eps*)".into(), e.residual.abs(), cfg.tol(1e-9));
    c.require(
        || format!("runtime {elapsed:.2?} exceeds 5 s"),
        elapsed < Duration::from_secs(5),
    );
    c.note(format!("p*={:.10} eps*={:.10}", p.crossing, e.crossing));
    Ok(c)
}

fn random_ball(rng: &mut ChaCha8Rng, radius_max: f64) -> BlochVector {
    let c: f64 = rng.gen_range(-1.0..=1.0);
    let a: f64 = rng.gen_range(0.0..2.0 * PI);
    let r: f64 = radius_max * rng.gen::<f64>().cbrt();
    let s = (1.0 - c * c).sqrt();
    BlochVector::new(r * s * a.cos(), r * s * a.sin(), r * c)
}

fn random_pure(rng: &mut ChaCha8Rng) -> PureQubit {
    PureQubit::new(rng.gen::<f64>().acos() * 2.0, rng.gen_range(0.0..2.0 * PI))
}

fn c9(cfg: &AcceptanceConfig, log: &mut FidelityLog) -> Result<Check> {
    let tol = cfg.tol(1e-10);
    let mut c = Check::new(tol);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..1000 {
        let (a, b) = (random_pure(&mut rng), random_pure(&mut rng));
        // Pure-state trace distance from the overlap alone.
        let d = (1.0 - a.overlap(&b).norm_sqr()).max(0.0).sqrt();
        let (l, _) = optimal_l(&a.density(), &b.density())?;
        c.close(
            || "optimal L vs (1 + D^2)/2".into(),
            l,
            0.5 * (1.0 + d * d),
            tol,
        );
    }
    for _ in 0..1000 {
        let r1 = density_from_bloch(&random_ball(&mut rng, 1.0))?;
        let r2 = density_from_bloch(&random_ball(&mut rng, 1.0))?;
        let explicit = HelstromMeasurement::new(&r1, &r2)?.success_probability(&r1, &r2);
        c.close(
            || "p_success vs Helstrom measurement".into(),
            p_success(&r1, &r2)?,
            explicit,
            tol,
        );
    }
    let tol_s1 = cfg.tol(1e-9);
    let mut s1 = supp_s1_sweep(PrepMode::NonLocal, Fig5Variant::OptimalGate, 32)?;
    s1.extend(supp_s1_sweep(
        PrepMode::NonLocal,
        Fig5Variant::FIXED_STATE,
        64,
    )?);
    s1.extend(supp_s1_sweep(
        PrepMode::NonLocal,
        Fig5Variant::FIXED_GATE,
        32,
    )?);
    log.records(&s1);
    for r in &s1 {
        c.close(
            || format!("S1 non-local at phi={}", r.phi),
            r.l_ctc_optimal,
            0.5,
            tol_s1,
        );
    }
    Ok(c)
}

/// Maximizes the projector-form ℒ over the sphere: a 10⁴-point Fibonacci grid,
/// then pattern search in spherical coordinates from the best grid point.
pub fn grid_search_optimal_l(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    const N: usize = 10_000;
    let golden = PI * (3.0 - 5f64.sqrt());
    let eval = |polar: f64, azimuth: f64| -> Result<f64> {
        let (s, c) = polar.sin_cos();
        let axis = BlochVector::new(s * azimuth.cos(), s * azimuth.sin(), c);
        let norm = axis.norm();
        l_measure(
            rho1,
            rho2,
            &MeasurementDirection::new(axis.scale(1.0 / norm))?,
        )
    };
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..N {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / N as f64;
        let (polar, azimuth) = (z.acos(), golden * i as f64);
        let v = eval(polar, azimuth)?;
        if v > best.0 {
            best = (v, polar, azimuth);
        }
    }
    let (mut value, mut polar, mut azimuth) = best;
    let mut step = 0.05;
    while step > 1e-10 {
        let mut improved = false;
        for (dp, da) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let v = eval(polar + dp, azimuth + da)?;
            if v > value {
                (value, polar, azimuth) = (v, polar + dp, azimuth + da);
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(value)
}

fn c10(cfg: &AcceptanceConfig) -> Result<Check> {
    let tol = cfg.tol(1e-9);
    let mut c = Check::new(tol);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 10);
    let mut tried = 0usize;
    let mut accepted = 0usize;
    while accepted < 1000 {
        tried += 1;
        let spec = if rng.gen_bool(0.25) {
            CircuitSpec::swap_cnot()
        } else {
            CircuitSpec::swap_cu(rng.gen_range(-FRAC_PI_2..FRAC_PI_2))
        }
        .with_noise(rng.gen_range(0.0..0.5), rng.gen_range(0.0..0.5));
        let input = PureQubit::new(
            rng.gen_range(0.3..2.0 * PI - 0.3),
            rng.gen_range(0.0..2.0 * PI),
        );
        let interaction = build_interaction(&spec)?;
        let rho_in = crate::circuits::depolarize(&input.density(), spec.input_noise)?;

        // Non-degenerate: a unique fixed point that is not near-degenerate.
        let mut shifted = pauli_transfer(&rho_in, &interaction);
        for (i, row) in shifted.iter_mut().enumerate() {
            row[i] -= 1.0;
        }
        let (sigma, _) = singular_values(shifted);
        if sigma[1] < 0.02 {
            continue;
        }
        accepted += 1;
        let eigen = solve_fixed_point(&rho_in, &interaction, &SolverOptions::default())?;
        let damped = solve_fixed_point(&rho_in, &interaction, &SolverOptions::damped())?;
        c.within(
            || format!("eigen vs damped for {spec:?}"),
            trace_distance(&eigen.rho_ctc, &damped.rho_ctc)?,
            tol,
        );
    }
    c.note(format!("{accepted} of {tried} samples non-degenerate"));

    let tol_grid = cfg.tol(1e-6);
    for _ in 0..200 {
        let r1 = density_from_bloch(&random_ball(&mut rng, 1.0))?;
        let r2 = density_from_bloch(&random_ball(&mut rng, 1.0))?;
        let (eigen, _) = optimal_l(&r1, &r2)?;
        c.close(
            || "optimal L vs grid search".into(),
            eigen,
            grid_search_optimal_l(&r1, &r2)?,
            tol_grid,
        );
    }
    Ok(c)
}

fn c11(cfg: &AcceptanceConfig, log: &FidelityLog) -> Check {
    let tol = cfg.tol(1e-9);
    let mut c = Check::new(tol);
    match log.worst {
        Some(w) => c.within(|| format!("worst fidelity {w}"), 1.0 - w, tol),
        None => c.require(|| "no scenarios recorded".into(), false),
    }
    c.note(format!("{} scenarios", log.count));
    c
}

fn finish(id: u8, check: Result<Check>, elapsed: Duration) -> CriterionOutcome {
    let name = NAMES[id as usize - 1];
    match check {
        Ok(c) => CriterionOutcome {
            id,
            name,
            passed: c.failure.is_none(),
            tolerance: c.tolerance,
            worst: c.worst,
            detail: c
                .failure
                .into_iter()
                .chain(c.notes)
                .collect::<Vec<_>>()
                .join("; "),
            elapsed,
        },
        Err(e) => CriterionOutcome {
            id,
            name,
            passed: false,
            tolerance: f64::NAN,
            worst: f64::NAN,
            detail: format!("error: {e}"),
            elapsed,
        },
    }
}

type ScenarioCheck = fn(&AcceptanceConfig, &mut FidelityLog) -> Result<Check>;

const SCENARIO_CHECKS: [ScenarioCheck; 9] = [c1, c2, c3, c4, c5, c6, c7, c8, c9];

/// Runs a single criterion (1–11). Criterion 11 re-runs the scenarios of 1–9.
pub fn run_criterion(id: u8, cfg: &AcceptanceConfig) -> CriterionOutcome {
    assert!(
        (1..=11).contains(&id),
        "criterion {id} is not part of the library suite"
    );
    let start = Instant::now();
    let mut log = FidelityLog::default();
    let check = match id {
        1..=9 => SCENARIO_CHECKS[id as usize - 1](cfg, &mut log),
        10 => c10(cfg),
        _ => {
            for f in SCENARIO_CHECKS {
                if let Err(e) = f(cfg, &mut log) {
                    return finish(id, Err(e), start.elapsed());
                }
            }
            Ok(c11(cfg, &log))
        }
    };
    finish(id, check, start.elapsed())
}

/// Runs criteria 1–11 in order, sharing the fidelity log with criterion 11.
pub fn run_all(cfg: &AcceptanceConfig) -> Vec<CriterionOutcome> {
    let mut log = FidelityLog::default();
    let mut outcomes = Vec::with_capacity(11);
    for (i, f) in SCENARIO_CHECKS.iter().enumerate() {
        let start = Instant::now();
        let check = f(cfg, &mut log);
        outcomes.push(finish(i as u8 + 1, check, start.elapsed()));
    }
    let start = Instant::now();
    outcomes.push(finish(10, c10(cfg), start.elapsed()));
    let start = Instant::now();
    outcomes.push(finish(11, Ok(c11(cfg, &log)), start.elapsed()));
    outcomes
}
