//! `ctcsim` command-line front end.

mod plot;

use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ctcsim::acceptance::{run_all, AcceptanceConfig};
use ctcsim::circuits::{build_interaction, CircuitSpec};
use ctcsim::deutsch::{
    ctc_bloch, evolve_output, solve_fixed_point, PreparationMode, SolverMethod, SolverOptions,
};
use ctcsim::experiments::{
    discriminate, fig5_surface, fig5_sweep, find_threshold, reproduce, Fig5Variant, GridConfig,
    NoiseParameter, PrepMode, SweepRecord, Target, ThresholdResult,
};
use ctcsim::qmath::{ComplexMatrix, DensityMatrix, PureQubit};
use ctcsim::{io as csvio, Error};

const EXIT_SELFTEST: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_NO_CONVERGENCE: u8 = 3;
const EXIT_INVARIANT: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "ctcsim",
    version,
    about = "Deutsch closed-timelike-curve circuit simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the consistency relation for one input and print ρ_CTC and ρ_out.
    FixedPoint(FixedPointArgs),
    /// Discriminate |H> from ψ(φ) through CU_xz(θ)·SWAP.
    Discriminate(DiscriminateArgs),
    /// One cut or surface through the (φ, θ) plane.
    Sweep(SweepArgs),
    /// Regenerate the data behind a figure.
    Reproduce(ReproduceArgs),
    /// Run the acceptance suite.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Also write an SVG plot next to --out.
    #[arg(long)]
    plot: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CircuitArg {
    SwapCnot,
    SwapCu,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PrepArg {
    Local,
    NonLocal,
}

impl From<PrepArg> for PrepMode {
    fn from(p: PrepArg) -> Self {
        match p {
            PrepArg::Local => PrepMode::LocalPure,
            PrepArg::NonLocal => PrepMode::NonLocal,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Eigen,
    Damped,
}

#[derive(Args, Debug)]
struct FixedPointArgs {
    #[arg(long, value_enum, default_value_t = CircuitArg::SwapCnot)]
    circuit: CircuitArg,
    /// Polar angle of the input state.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    phi: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    phase: f64,
    /// Rotation axis angle θ_xz for swap-cu.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    theta: f64,
    /// Input depolarisation.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    p: f64,
    /// Gate failure probability.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    epsilon: f64,
    /// `non-local` feeds the loop the equal mixture of |H> and the input.
    #[arg(long, value_enum, default_value_t = PrepArg::Local)]
    prep: PrepArg,
    #[arg(long, value_enum, default_value_t = MethodArg::Eigen)]
    method: MethodArg,
    /// Step tolerance for damped iteration.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    /// Angles are given in degrees.
    #[arg(long)]
    deg: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct DiscriminateArgs {
    #[arg(long, allow_negative_numbers = true)]
    phi: f64,
    /// Defaults to the optimal gate (φ − π)/2.
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    p: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = PrepArg::Local)]
    prep: PrepArg,
    #[arg(long)]
    deg: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    OptimalGate,
    FixedState,
    FixedGate,
    Surface,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, value_enum, default_value_t = VariantArg::OptimalGate)]
    variant: VariantArg,
    #[arg(long, value_enum, default_value_t = PrepArg::Local)]
    prep: PrepArg,
    /// Fixed φ for fixed-state (default 3π/2).
    #[arg(long, allow_negative_numbers = true)]
    phi: Option<f64>,
    /// Fixed θ for fixed-gate (default π/4).
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Points along the swept axis (φ points for a surface; θ gets twice as many).
    #[arg(long, default_value_t = 32)]
    grid: usize,
    #[arg(long)]
    deg: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TargetArg {
    Fig3,
    Fig5a,
    Fig5b,
    Fig5c,
    Fig6,
    S1,
    S2,
    Thresholds,
}

#[derive(Args, Debug)]
struct ReproduceArgs {
    #[arg(value_enum)]
    target: TargetArg,
    /// Uniform grid size per axis (defaults: 32 φ, 64 θ, 41 noise points).
    #[arg(long)]
    grid: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    /// Replace every pinned tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

/// Bad user input; reported with exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn check_tol(tol: Option<f64>) -> anyhow::Result<()> {
    match tol {
        Some(t) if !(t >= 1e-14) => Err(usage(format!("tolerance {t} must be at least 1e-14"))),
        _ => Ok(()),
    }
}

fn check_grid(n: usize) -> anyhow::Result<()> {
    if n < 2 {
        return Err(usage(format!("grid size {n} must be at least 2")));
    }
    Ok(())
}

fn angle(x: f64, deg: bool) -> f64 {
    if deg {
        x.to_radians()
    } else {
        x
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_VALIDATION);
    }
    let result = match cli.command {
        Command::FixedPoint(a) => cmd_fixed_point(a),
        Command::Discriminate(a) => cmd_discriminate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Reproduce(a) => cmd_reproduce(a),
        Command::Selftest(a) => cmd_selftest(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Usage>().is_some() {
        return EXIT_VALIDATION;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::NoConvergence { .. }) => EXIT_NO_CONVERGENCE,
        Some(_) => EXIT_VALIDATION,
        None => 1,
    }
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("CTCSIM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("CTCSIM_THREADS={raw:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring thread pool")
}

fn open_output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_records(output: &OutputArgs, records: &[SweepRecord], title: &str) -> anyhow::Result<()> {
    let mut out = open_output(output.out.as_deref())?;
    match output.format {
        Format::Csv => csvio::write_records(&mut out, records)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, records)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    if output.plot {
        let Some(path) = &output.out else {
            bail!(usage("--plot needs --out"));
        };
        let svg = path.with_extension("svg");
        std::fs::write(&svg, plot::records_svg(title, records))
            .with_context(|| format!("writing {}", svg.display()))?;
    }
    Ok(())
}

fn format_matrix(m: &ComplexMatrix) -> String {
    let mut s = String::new();
    for i in 0..m.dim() {
        s.push_str("  [");
        for j in 0..m.dim() {
            let z = m.get(i, j);
            s.push_str(&format!(" {:>13.10}{:+.10}i", z.re, z.im));
        }
        s.push_str(" ]\n");
    }
    s
}

fn matrix_json(m: &DensityMatrix) -> serde_json::Value {
    let m = m.mat();
    let rows: Vec<Vec<[f64; 2]>> = (0..m.dim())
        .map(|i| {
            (0..m.dim())
                .map(|j| [m.get(i, j).re, m.get(i, j).im])
                .collect()
        })
        .collect();
    json!(rows)
}

fn cmd_fixed_point(a: FixedPointArgs) -> anyhow::Result<u8> {
    check_tol(a.tol)?;
    let (phi, phase, theta) = (
        angle(a.phi, a.deg),
        angle(a.phase, a.deg),
        angle(a.theta, a.deg),
    );
    let spec = match a.circuit {
        CircuitArg::SwapCnot => CircuitSpec::swap_cnot(),
        CircuitArg::SwapCu => CircuitSpec::swap_cu(theta),
    }
    .with_noise(a.p, a.epsilon);
    spec.validate()?;
    let input = PureQubit::new(phi, phase);
    let prep = match a.prep {
        PrepArg::Local => PreparationMode::LocalPure(input),
        PrepArg::NonLocal => {
            PreparationMode::non_local(vec![PureQubit::horizontal(), input], vec![0.5, 0.5])?
        }
    };
    let opts = SolverOptions {
        method: match a.method {
            MethodArg::Eigen => SolverMethod::EigenMaxEntropy,
            MethodArg::Damped => SolverMethod::DampedIteration,
        },
        tol: a.tol.unwrap_or(1e-12),
        max_iter: a.max_iter,
        ..SolverOptions::default()
    };

    let interaction = build_interaction(&spec)?;
    let rho_in = ctcsim::circuits::depolarize(&prep.ctc_input(), spec.input_noise)?;
    let fp = solve_fixed_point(&rho_in, &interaction, &opts)?;
    // The rail carrying the user's input state (the last label for non-local).
    let rail = *prep.rail_states().last().expect("at least one rail state");
    let rail = ctcsim::circuits::depolarize(&rail, spec.input_noise)?;
    let rho_out = evolve_output(&rail, &fp.rho_ctc, &interaction)?;
    let bloch = ctc_bloch(&fp);

    println!("rho_ctc =\n{}", format_matrix(fp.rho_ctc.mat()));
    println!(
        "bloch = ({:.10}, {:.10}, {:.10})",
        bloch.x, bloch.y, bloch.z
    );
    println!("residual = {:.3e}", fp.residual);
    println!(
        "fixed_set_dimension = {}{}",
        fp.fixed_set_dimension,
        if fp.is_degenerate() {
            " (degenerate: maximum-entropy member chosen)"
        } else {
            ""
        }
    );
    println!("entropy = {:.10}", fp.entropy);
    println!("iterations = {}", fp.iterations);
    println!("rho_out =\n{}", format_matrix(rho_out.mat()));

    if let Some(path) = &a.output.out {
        let mut out = open_output(Some(path))?;
        match a.output.format {
            Format::Json => {
                let doc = json!({
                    "rho_ctc": matrix_json(&fp.rho_ctc),
                    "bloch": [bloch.x, bloch.y, bloch.z],
                    "residual": fp.residual,
                    "fixed_set_dimension": fp.fixed_set_dimension,
                    "entropy": fp.entropy,
                    "iterations": fp.iterations,
                    "rho_out": matrix_json(&rho_out),
                });
                serde_json::to_writer_pretty(&mut out, &doc)?;
                writeln!(out)?;
            }
            Format::Csv => {
                let f = csvio::format_f64;
                writeln!(out, "quantity,value")?;
                writeln!(out, "bloch_x,{}", f(bloch.x))?;
                writeln!(out, "bloch_y,{}", f(bloch.y))?;
                writeln!(out, "bloch_z,{}", f(bloch.z))?;
                writeln!(out, "residual,{}", f(fp.residual))?;
                writeln!(out, "fixed_set_dimension,{}", fp.fixed_set_dimension)?;
                writeln!(out, "entropy,{}", f(fp.entropy))?;
                writeln!(out, "iterations,{}", fp.iterations)?;
            }
        }
        out.flush()?;
    }
    Ok(0)
}

fn cmd_discriminate(a: DiscriminateArgs) -> anyhow::Result<u8> {
    let phi = angle(a.phi, a.deg);
    let theta = a.theta.map_or(0.5 * (phi - PI), |t| angle(t, a.deg));
    let r = discriminate("discriminate", a.prep.into(), phi, theta, a.p, a.epsilon)?;
    println!("theta_xz      = {theta:.10}");
    println!("L_ctc_sigma_z = {:.10}", r.l_ctc_sigma_z);
    println!("L_ctc_optimal = {:.10}", r.l_ctc_optimal);
    println!("D_ctc         = {:.10}", r.d_ctc);
    println!("L_qm          = {:.10}", r.l_qm);
    println!("D_qm          = {:.10}", r.d_qm);
    println!("p_succ_ctc    = {:.10}", r.p_succ_ctc);
    println!("p_succ_qm     = {:.10}", r.p_succ_qm);
    println!("residual      = {:.3e}", r.fixed_point_residual);
    if a.output.out.is_some() {
        write_records(&a.output, std::slice::from_ref(&r), "discriminate")?;
    }
    Ok(0)
}

fn cmd_sweep(a: SweepArgs) -> anyhow::Result<u8> {
    check_grid(a.grid)?;
    let mode: PrepMode = a.prep.into();
    let records = match a.variant {
        VariantArg::OptimalGate => fig5_sweep(mode, Fig5Variant::OptimalGate, a.grid)?,
        VariantArg::FixedState => {
            let phi = a.phi.map_or(1.5 * PI, |x| angle(x, a.deg));
            fig5_sweep(mode, Fig5Variant::FixedState { phi }, a.grid)?
        }
        VariantArg::FixedGate => {
            let theta_xz = a.theta.map_or(PI / 4.0, |x| angle(x, a.deg));
            CircuitSpec::swap_cu(theta_xz).validate()?;
            fig5_sweep(mode, Fig5Variant::FixedGate { theta_xz }, a.grid)?
        }
        VariantArg::Surface => fig5_surface(mode, a.grid, 2 * a.grid)?,
    };
    write_records(&a.output, &records, "sweep")?;
    Ok(0)
}

fn cmd_reproduce(a: ReproduceArgs) -> anyhow::Result<u8> {
    if let Some(n) = a.grid {
        check_grid(n)?;
    }
    let grid = a.grid.map_or_else(GridConfig::default, GridConfig::uniform);
    let target = match a.target {
        TargetArg::Thresholds => return reproduce_thresholds(&a.output),
        TargetArg::Fig3 => Target::Fig3,
        TargetArg::Fig5a => Target::Fig5a,
        TargetArg::Fig5b => Target::Fig5b,
        TargetArg::Fig5c => Target::Fig5c,
        TargetArg::Fig6 => Target::Fig6,
        TargetArg::S1 => Target::S1,
        TargetArg::S2 => Target::S2,
    };
    let records = reproduce(target, &grid)?;
    write_records(&a.output, &records, target.name())?;

    let failures: Vec<String> = records
        .iter()
        .enumerate()
        .filter_map(|(i, r)| {
            r.check_invariants()
                .err()
                .map(|e| format!("row {i} ({}): {e}", r.experiment_id))
        })
        .collect();
    if failures.is_empty() {
        eprintln!(
            "{}: {} records, all invariants hold",
            target.name(),
            records.len()
        );
        Ok(0)
    } else {
        for f in failures.iter().take(10) {
            eprintln!("invariant violated: {f}");
        }
        eprintln!(
            "{}: {} of {} records violate invariants",
            target.name(),
            failures.len(),
            records.len()
        );
        Ok(EXIT_INVARIANT)
    }
}

fn reproduce_thresholds(output: &OutputArgs) -> anyhow::Result<u8> {
    let results: Vec<ThresholdResult> = [NoiseParameter::P, NoiseParameter::Epsilon]
        .into_iter()
        .map(find_threshold)
        .collect::<Result<_, _>>()?;
    let mut out = open_output(output.out.as_deref())?;
    match output.format {
        Format::Csv => csvio::write_thresholds(&mut out, &results)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &results)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    let mut ok = true;
    for t in &results {
        let holds = t.residual.abs() <= 1e-9;
        ok &= holds;
        eprintln!(
            "{}* = {:.10} (bracket width {:.1e}, |f| = {:.1e}){}",
            t.parameter.as_str(),
            t.crossing,
            t.achieved_tolerance,
            t.residual.abs(),
            if holds { "" } else { "  INVARIANT VIOLATED" }
        );
    }
    Ok(if ok { 0 } else { EXIT_INVARIANT })
}

fn cmd_selftest(a: SelftestArgs) -> anyhow::Result<u8> {
    check_tol(a.tol)?;
    let cfg = AcceptanceConfig {
        tol_override: a.tol,
    };
    let start = std::time::Instant::now();
    let outcomes = run_all(&cfg);
    for o in &outcomes {
        println!("{}", o.line());
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    println!(
        "{passed}/{} criteria passed in {:.2?}",
        outcomes.len(),
        start.elapsed()
    );
    Ok(if passed == outcomes.len() {
        0
    } else {
        EXIT_SELFTEST
    })
}
