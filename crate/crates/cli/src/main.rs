//! `sosp`: generate hard instances, verify points, run the solver and the reduction harness,
//! classify cells and render the construction.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dashu::rational::RBig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use sosp_core::box_certifier::{boundary_prox_check, census, certify_poly, classify_cell, Group};
use sosp_core::hard_instance::{HardInstance, PatchScalar, ScaleMode};
use sosp_core::iter_problems::IterInstance;
use sosp_core::localopt_reduction::{ReductionInstance, Smoothness as Constants, Verdict};
use sosp_core::numeric::{set_hp_precision, Field, Hp};
use sosp_core::render::render_svg;
use sosp_core::snap_solver::{snap_run, SnapParams, Smoothness};
use sosp_core::stationarity::{verify_sosp, Objective, Polytope, SospTolerances};
use sosp_core::synthetic::{Quadratic, Quartic};
use sosp_core::Error;

#[derive(Parser)]
#[command(name = "sosp", version, about = "Hard instances for second-order stationary points on polytopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize an ITER instance and its hard objective.
    Gen(GenArgs),
    /// Run the (ε_G, ε_H)-SOSP test at a point.
    Verify(VerifyArgs),
    /// Write the grid assignment as SVG.
    Render(RenderArgs),
    /// Run SNAP from a start point and decode the terminal point.
    Solve(SolveArgs),
    /// Sample grid points of a synthetic reduction instance and check the improvement contract.
    Reduce(ReduceArgs),
    /// Classify and certify one cell, or run the census of all cells.
    Classify(ClassifyArgs),
    /// Time evaluation on the f64, high-precision and rational paths.
    Bench(BenchArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// ITER instance as JSON `{"n": .., "C": [..]}`.
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value = "unit", value_parser = parse_scale)]
    scale: ScaleMode,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    inst: InstanceArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    /// Point in the scale mode's coordinates, e.g. `0.5,1/3`.
    #[arg(long, value_parser = parse_point)]
    point: Vec2,
    /// Gradient tolerance; `inf` accepts every gradient.
    #[arg(long, default_value = "1e-10", value_parser = parse_eps)]
    eps_g: f64,
    /// Curvature tolerance; `inf` accepts every curvature.
    #[arg(long, default_value = "1e-10", value_parser = parse_eps)]
    eps_h: f64,
    /// `rational` or a float precision in bits (at least 128).
    #[arg(long, default_value = "192", value_parser = parse_precision)]
    precision: Precision,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value = "moderate", value_parser = parse_scale)]
    scale: ScaleMode,
    /// Start point; a seeded random interior point when absent.
    #[arg(long, value_parser = parse_point)]
    start: Option<Vec2>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "1e-10", value_parser = parse_eps)]
    eps_g: f64,
    #[arg(long, default_value = "1e-10", value_parser = parse_eps)]
    eps_h: f64,
    #[arg(long, default_value = "192", value_parser = parse_precision)]
    precision: Precision,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum SyntheticKind {
    /// `½(x² − y²)` on `[−1,1]²`.
    Saddle,
    /// `¼x⁴ − ½x² + ½y²` on `[−3/2,3/2]²`.
    DoubleWell,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long, value_enum, default_value = "double-well")]
    objective: SyntheticKind,
    /// Add the cut `x + y ≤ 1`, switching rounding to the polytope lattices.
    #[arg(long)]
    cut: bool,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "0.1", value_parser = parse_eps)]
    eps_g: f64,
    #[arg(long, default_value = "0.1", value_parser = parse_eps)]
    eps_h: f64,
    #[arg(long, default_value = "128", value_parser = parse_precision)]
    precision: Precision,
    /// Write every per-point report here as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    instance: PathBuf,
    /// A single cell `a,b`; the whole grid when absent.
    #[arg(long, value_parser = parse_cell)]
    cell: Option<(i64, i64)>,
    #[arg(long, default_value_t = 51)]
    resolution: usize,
    #[arg(long, default_value = "1e-10", value_parser = parse_eps)]
    eps0: f64,
    /// Write the full report here instead of a summary on stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "192", value_parser = parse_precision)]
    precision: Precision,
}

type Vec2 = [RBig; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Precision {
    Rational,
    Bits(usize),
}

/// Failure classes mapped onto exit codes 1 and 2.
enum Failure {
    /// Bad input: exit 2.
    Usage(String),
    /// The command ran but the property failed: exit 1.
    Semantic(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Contract(_) | Error::Classification(_) => Failure::Semantic(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = std::result::Result<bool, Failure>;

fn parse_scale(s: &str) -> Result<ScaleMode, String> {
    ScaleMode::from_str(s).map_err(|e| e.to_string())
}

fn parse_eps(s: &str) -> Result<f64, String> {
    if s.eq_ignore_ascii_case("inf") {
        return Ok(f64::MAX);
    }
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive tolerance or `inf`, got {s:?}")),
    }
}

fn parse_precision(s: &str) -> Result<Precision, String> {
    if s == "rational" {
        return Ok(Precision::Rational);
    }
    match s.parse::<usize>() {
        Ok(b) if b >= 128 => Ok(Precision::Bits(b)),
        _ => Err(format!("precision must be `rational` or at least 128 bits, got {s:?}")),
    }
}

fn parse_scalar(s: &str) -> Result<RBig, String> {
    let s = s.trim();
    if s.contains('/') {
        return RBig::from_str(s).map_err(|e| format!("bad rational {s:?}: {e}"));
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Field::to_ratio(&v)),
        _ => Err(format!("bad coordinate {s:?}")),
    }
}

fn parse_point(s: &str) -> Result<Vec2, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [x, y] = parts.as_slice() else {
        return Err(format!("expected `x,y`, got {s:?}"));
    };
    Ok([parse_scalar(x)?, parse_scalar(y)?])
}

fn parse_cell(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `a,b`, got {s:?}"))?;
    let int = |t: &str| t.trim().parse::<i64>().map_err(|e| format!("bad cell index {t:?}: {e}"));
    Ok((int(a)?, int(b)?))
}

/// Float precision for commands that need eigenvalues.
fn float_bits(p: Precision, what: &str) -> Result<usize, Failure> {
    match p {
        Precision::Bits(b) => Ok(b),
        Precision::Rational => Err(Failure::Usage(format!("{what} needs square roots; use a float precision of at least 128 bits"))),
    }
}

fn load(path: &PathBuf) -> Result<IterInstance, Failure> {
    Ok(IterInstance::from_json_file(path)?)
}

/// Pretty JSON on stdout; a closed pipe is not an error.
fn emit<S: Serialize>(value: &S) {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn write_json<S: Serialize>(path: &PathBuf, value: &S) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    std::fs::write(path, text).map_err(Error::from)?;
    Ok(())
}

fn ratio_str(r: &RBig) -> String {
    r.to_string()
}

fn cmd_gen(args: &GenArgs) -> Outcome {
    let h = HardInstance::build(load(&args.inst.instance)?, args.inst.scale);
    let field = h.field();
    emit(&json!({
        "n": field.instance().n(),
        "N": h.side(),
        "columns": field.columns(),
        "solutions": field.solutions(),
        "brute_solution": field.instance().solve_brute()?,
        "lipschitz": h.lipschitz_report(),
    }));
    Ok(true)
}

fn cmd_verify(args: &VerifyArgs) -> Outcome {
    set_hp_precision(float_bits(args.precision, "verify")?);
    let h = HardInstance::build(load(&args.inst.instance)?, args.inst.scale);
    let poly = h.domain();
    poly.require_feasible(&args.point)?;
    let x: Vec<Hp> = args.point.iter().map(Hp::from_ratio).collect();
    let tol = SospTolerances {
        eps_g: Hp::from_f64(args.eps_g),
        eps_h: Hp::from_f64(args.eps_h),
        l1: Hp::from_f64(h.lipschitz_report().stated.l1),
    };
    let report = verify_sosp(&h, &poly, &x, &tol)?;
    let cell = h.evaluate(&x[0], &x[1])?.cell;
    let summary = report.summary();
    emit(&json!({
        "point_exact": args.point.iter().map(ratio_str).collect::<Vec<_>>(),
        "cell": cell,
        "report": summary,
        "decoded_solution": h.decode_scaled(&x[0], &x[1]),
    }));
    Ok(summary.pass)
}

fn cmd_render(args: &RenderArgs) -> Outcome {
    let h = HardInstance::build(load(&args.instance)?, ScaleMode::Unit);
    let (svg, summary) = render_svg(h.field())?;
    std::fs::write(&args.out, svg).map_err(Error::from)?;
    emit(&summary);
    Ok(true)
}

/// Dyadic point of `(0, hi)²` with 20-bit coordinates.
fn interior_start<R: Rng>(rng: &mut R, hi: i64) -> Vec2 {
    let mut coord = || RBig::from(rng.gen_range(1..(1i64 << 20))) * RBig::from(hi) / RBig::from(1i64 << 20);
    [coord(), coord()]
}

fn cmd_solve(args: &SolveArgs) -> Outcome {
    set_hp_precision(float_bits(args.precision, "solve")?);
    let inst = load(&args.instance)?;
    let h = HardInstance::build(inst, args.scale);
    let start = match &args.start {
        Some(p) => p.clone(),
        None => interior_start(&mut ChaCha8Rng::seed_from_u64(args.seed), h.domain_max()),
    };
    let poly = h.domain();
    poly.require_feasible(&start)?;
    let stated = h.lipschitz_report().stated;
    let mut params = SnapParams::new(
        Hp::from_f64(args.eps_g),
        Hp::from_f64(args.eps_h),
        Hp::from_f64(stated.l1),
        Hp::from_f64(stated.l2),
        args.max_iter,
    );
    params.smoothness = Smoothness::Adaptive;
    params.record_steps = false;
    let x0: Vec<Hp> = start.iter().map(Hp::from_ratio).collect();
    let clock = Instant::now();
    let trace = snap_run(&h, &poly, &x0, &params)?;
    let elapsed = clock.elapsed().as_secs_f64();
    let x = trace.point();
    let decoded = h.decode_scaled(&x[0], &x[1]);
    let brute = h.field().instance().solve_brute()?;
    let is_solution = match decoded {
        Some(k) => h.field().instance().is_solution(k)?,
        None => false,
    };
    emit(&json!({
        "start": start.iter().map(ratio_str).collect::<Vec<_>>(),
        "status": trace.status,
        "iterations": trace.iterations,
        "pgd_steps": trace.pgd_steps,
        "curvature_steps": trace.curvature_steps,
        "max_steps": trace.max_steps,
        "violations": trace.violations,
        "f_start": trace.f_start.to_f64(),
        "report": trace.report.summary(),
        "point_exact": x.iter().map(|v| ratio_str(&v.to_ratio())).collect::<Vec<_>>(),
        "decoded_solution": decoded,
        "decoded_is_solution": is_solution,
        "brute_solution": brute,
        "seconds": elapsed,
    }));
    Ok(trace.terminal() && trace.report.pass() && is_solution)
}

#[derive(Default, Serialize)]
struct VerdictCounts {
    solution: usize,
    improved_by_decrease: usize,
    improved_by_active_set: usize,
    violation: usize,
}

fn reduce_with<O>(args: &ReduceArgs, objective: O, radius: RBig, constants: Constants) -> Outcome
where
    O: Objective<Hp>,
{
    let lo = -radius.clone();
    let mut poly = Polytope::unit_box(2, lo, radius);
    if args.cut {
        poly = poly.with_cut(vec![RBig::ONE, RBig::ONE], RBig::ONE)?;
    }
    let r = ReductionInstance::new(objective, poly, args.eps_g, args.eps_h, constants)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut counts = VerdictCounts::default();
    let mut reports = Vec::with_capacity(args.samples);
    for _ in 0..args.samples {
        let x = r.random_grid_point(&mut rng)?;
        let rep = r.improvement_check::<Hp>(&x)?;
        match rep.verdict {
            Verdict::Solution => counts.solution += 1,
            Verdict::ImprovedByDecrease => counts.improved_by_decrease += 1,
            Verdict::ImprovedByActiveSet => counts.improved_by_active_set += 1,
            Verdict::Violation => counts.violation += 1,
        }
        reports.push(json!({ "point": x.iter().map(Field::to_f64).collect::<Vec<_>>(), "report": rep }));
    }
    if let Some(path) = &args.out {
        write_json(path, &reports)?;
    }
    emit(&json!({
        "samples": args.samples,
        "weight": Field::to_f64(&r.weight),
        "rounding_bound": r.rounding_bound(),
        "smoothness": constants,
        "verdicts": counts,
    }));
    Ok(counts.violation == 0)
}

fn cmd_reduce(args: &ReduceArgs) -> Outcome {
    set_hp_precision(float_bits(args.precision, "reduce")?);
    match args.objective {
        SyntheticKind::Saddle => {
            let q = Quadratic::saddle();
            let c = q.smoothness_on_box(1.0);
            reduce_with(args, q, RBig::ONE, c)
        }
        SyntheticKind::DoubleWell => {
            let q = Quartic::double_well();
            let c = q.smoothness_on_box(1.5);
            reduce_with(args, q, RBig::from(3) / RBig::from(2), c)
        }
    }
}

fn cmd_classify(args: &ClassifyArgs) -> Outcome {
    let h = HardInstance::build(load(&args.instance)?, ScaleMode::Unit);
    let Some((a, b)) = args.cell else {
        let report = census(&h, args.eps0, args.resolution)?;
        let localized = report.x_localized(&h.field().solutions());
        match &args.out {
            Some(path) => write_json(path, &report)?,
            None => emit(&json!({
                "n": report.n,
                "N": report.side,
                "label_counts": report.label_counts,
                "refined_cells": report.refined_cells,
                "failing_cells": report.failing_cells,
                "x_localized": localized,
            })),
        }
        return Ok(localized);
    };
    let label = classify_cell(h.field(), a, b)?;
    let (certified, detail) = if label.group == Group::Boundary {
        let r = boundary_prox_check(&h, &[(a, b)], args.eps0, args.resolution)?;
        (r.passed(), serde_json::to_value(&r).map_err(Error::from)?)
    } else {
        let patch = h.patch(a, b)?;
        let r = certify_poly((a, b), &<Hp as PatchScalar>::poly(&patch), args.eps0, args.resolution);
        (r.certified(), serde_json::to_value(&r).map_err(Error::from)?)
    };
    let out = json!({ "cell": (a, b), "label": label, "certified": certified, "detail": detail });
    match &args.out {
        Some(path) => write_json(path, &out)?,
        None => emit(&out),
    }
    Ok(certified)
}

fn time_path<T: PatchScalar>(h: &HardInstance, points: &[(RBig, RBig)]) -> Result<Value, Failure> {
    let xs: Vec<(T, T)> = points.iter().map(|(x, y)| (T::from_ratio(x), T::from_ratio(y))).collect();
    let clock = Instant::now();
    let mut checksum = 0.0;
    for (x, y) in &xs {
        checksum += h.evaluate_unit(x, y)?.jet.f.to_f64();
    }
    let secs = clock.elapsed().as_secs_f64();
    Ok(json!({
        "evaluations": xs.len(),
        "seconds": secs,
        "micros_per_eval": 1e6 * secs / xs.len().max(1) as f64,
        "checksum": checksum,
    }))
}

fn cmd_bench(args: &BenchArgs) -> Outcome {
    if let Precision::Bits(b) = args.precision {
        set_hp_precision(b);
    }
    let h = HardInstance::build(load(&args.instance)?, ScaleMode::Unit);
    let side = h.side();
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let points: Vec<(RBig, RBig)> = (0..args.samples).map(|_| {
        let [x, y] = interior_start(&mut rng, side);
        (x, y)
    }).collect();
    time_path::<f64>(&h, &points)?;
    let mut out = json!({ "N": side, "samples": args.samples, "f64": time_path::<f64>(&h, &points)? });
    if let Precision::Bits(b) = args.precision {
        out["hp"] = time_path::<Hp>(&h, &points)?;
        out["hp_bits"] = json!(b);
    }
    out["rational"] = time_path::<RBig>(&h, &points)?;
    emit(&out);
    Ok(true)
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Render(a) => cmd_render(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Reduce(a) => cmd_reduce(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Semantic(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
