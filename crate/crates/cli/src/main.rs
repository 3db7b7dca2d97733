mod corpus;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use gauge_lab::descent::{
    descent_run, generic_candidate, grid_aligned_candidate, replay, DescentOptions, GridSpec, RefutationTrace,
};
use gauge_lab::gamma::{gamma_estimate_seeded, Budget, GammaWitness, DEFAULT_MARGIN};
use gauge_lab::norms::{dual_gauge, SpaceDescriptor, Vec2};
use gauge_lab::optimize::DEFAULT_SEED;
use gauge_lab::orthogonality::{
    bj_orthogonal_definitional, bj_witness_search, norm_parallel, parallel_by_radius, OrthOutcome, OrthVerdict,
    ParallelVerdict, RadiusVerdict,
};
use gauge_lab::OperatorPair;

const THREADS_ENV: &str = "GAUGE_LAB_THREADS";

#[derive(Parser)]
#[command(
    name = "gauge-lab",
    version,
    about = "Reinhardt norms, orthogonality, the Property P constant and the isometry descent"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the gauge and the dual gauge at a vector.
    Gauge(GaugeArgs),
    /// Birkhoff-James orthogonality of T to S, by definition and by witness.
    Bj(PairArgs),
    /// Norm parallelism of T and S, by phase scan and by numerical radius.
    Parallel(PairArgs),
    /// Lower bound for the Property P constant with a witness certificate.
    Gamma(GammaArgs),
    /// Sweep the Property P constant over a grid of B_{p,q} spaces (CSV).
    GammaGrid(GammaGridArgs),
    /// Certify or refute candidate isometries.
    Descent {
        #[command(subcommand)]
        action: DescentCommand,
    },
    /// Re-run the shipped corpus and compare with the recorded verdicts.
    Corpus(corpus::CorpusArgs),
}

#[derive(Args)]
struct GaugeArgs {
    #[arg(long)]
    space: SpaceDescriptor,
    /// Two coordinates, e.g. `1,0` or `0.5+0.5i,-1i`.
    #[arg(long, allow_hyphen_values = true)]
    vec: String,
}

#[derive(Args)]
struct PairArgs {
    /// Pair JSON `{n, T, S, space}`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Fail unless the verdict is `holds` or `fails`.
    #[arg(long)]
    expect: Option<Expectation>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Expectation {
    Holds,
    Fails,
}

#[derive(Args)]
struct GammaArgs {
    #[arg(long)]
    space: SpaceDescriptor,
    /// `STARTSxITERS`.
    #[arg(long, default_value = "64x500")]
    budget: Budget,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
    /// Fail unless the estimate exceeds `1 + margin` (`fails`) or not (`not-refuted`).
    #[arg(long)]
    expect: Option<GammaExpectation>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum GammaExpectation {
    Fails,
    NotRefuted,
}

#[derive(Args)]
struct GammaGridArgs {
    /// Explicit exponents for both axes, e.g. `1,1.5,2,3`; overrides the ranges.
    #[arg(long, value_delimiter = ',')]
    points: Option<Vec<f64>>,
    /// `LO,HI` for p.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [1.0, 3.0])]
    p_range: Vec<f64>,
    /// `LO,HI` for q.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [1.0, 3.0])]
    q_range: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    step: f64,
    #[arg(long, default_value = "64x500")]
    budget: Budget,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum DescentCommand {
    /// Run the descent on a pair and write the trace.
    Run(DescentRunArgs),
    /// Replay a refuted trace and recheck its terminal fact.
    Replay {
        #[arg(long)]
        trace: PathBuf,
    },
    /// Write a reproducible candidate pair over l1.
    Candidate(CandidateArgs),
}

#[derive(Args)]
struct DescentRunArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 32)]
    max_steps: usize,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// Relative phases of the verification grid (complex spaces).
    #[arg(long)]
    phases: Option<usize>,
    /// Fail unless the verdict has this label.
    #[arg(long)]
    expect: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CandidateArgs {
    #[arg(long)]
    n: usize,
    /// Grid phases the candidate is aligned to; omit for a generic candidate.
    #[arg(long)]
    phases: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Result of a command that ran to completion.
pub enum Status {
    Pass,
    CheckFailed(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::CheckFailed(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| anyhow!("{THREADS_ENV} must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(command: Command) -> Result<Status> {
    match command {
        Command::Gauge(args) => gauge_cmd(args),
        Command::Bj(args) => bj_cmd(args),
        Command::Parallel(args) => parallel_cmd(args),
        Command::Gamma(args) => gamma_cmd(args),
        Command::GammaGrid(args) => gamma_grid_cmd(args),
        Command::Descent { action } => match action {
            DescentCommand::Run(args) => descent_run_cmd(args),
            DescentCommand::Replay { trace } => replay_cmd(&trace),
            DescentCommand::Candidate(args) => candidate_cmd(args),
        },
        Command::Corpus(args) => corpus::run(args),
    }
}

pub fn read_pair(path: &Path) -> Result<OperatorPair> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    OperatorPair::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn emit<T: Serialize>(value: &T, output: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => Ok(io::stdout().write_all(text.as_bytes())?),
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        bail!("{name} must be positive and finite, got {v}");
    }
    Ok(())
}

fn parse_vec2(text: &str) -> Result<Vec2> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        bail!("vec: expected two comma-separated coordinates, got `{text}`");
    }
    let coord = |t: &str| {
        t.trim()
            .parse::<Complex64>()
            .map_err(|_| anyhow!("vec: `{t}` is not a number"))
    };
    Ok(Vec2::new(coord(parts[0])?, coord(parts[1])?))
}

#[derive(Serialize)]
struct GaugeReport {
    space: SpaceDescriptor,
    vec: Vec2,
    gauge: f64,
    dual_gauge: f64,
}

fn gauge_cmd(args: GaugeArgs) -> Result<Status> {
    let v = parse_vec2(&args.vec)?;
    let report = GaugeReport {
        gauge: args.space.gauge(&v)?,
        dual_gauge: dual_gauge(&v, &args.space)?,
        space: args.space,
        vec: v,
    };
    emit(&report, None)?;
    Ok(Status::Pass)
}

fn expectation_status(holds: bool, agree: bool, expect: Option<Expectation>, what: &str) -> Status {
    if !agree {
        return Status::CheckFailed(format!("the two {what} criteria disagree"));
    }
    match expect {
        Some(Expectation::Holds) if !holds => Status::CheckFailed(format!("expected {what} to hold")),
        Some(Expectation::Fails) if holds => Status::CheckFailed(format!("expected {what} to fail")),
        _ => Status::Pass,
    }
}

#[derive(Serialize)]
struct BjReport {
    definitional: OrthVerdict,
    witness: OrthVerdict,
    agree: bool,
}

fn bj_cmd(args: PairArgs) -> Result<Status> {
    positive("tol", args.tol)?;
    let pair = read_pair(&args.input)?;
    let definitional = bj_orthogonal_definitional(&pair.t, &pair.s, args.tol)?;
    let witness = bj_witness_search(&pair.t, &pair.s, args.tol)?;
    let agree = witness.outcome == OrthOutcome::WitnessNotFound || witness.holds == definitional.holds;
    let holds = definitional.holds;
    emit(
        &BjReport {
            definitional,
            witness,
            agree,
        },
        args.output.as_deref(),
    )?;
    Ok(expectation_status(holds, agree, args.expect, "orthogonality"))
}

#[derive(Serialize)]
struct ParallelReport {
    phase_scan: ParallelVerdict,
    radius: RadiusVerdict,
    agree: bool,
}

fn parallel_cmd(args: PairArgs) -> Result<Status> {
    positive("tol", args.tol)?;
    let pair = read_pair(&args.input)?;
    let phase_scan = norm_parallel(&pair.t, &pair.s, args.tol)?;
    let radius = parallel_by_radius(&pair.t, &pair.s, args.tol)?;
    let agree = phase_scan.holds == radius.holds;
    let holds = phase_scan.holds;
    emit(
        &ParallelReport {
            phase_scan,
            radius,
            agree,
        },
        args.output.as_deref(),
    )?;
    Ok(expectation_status(holds, agree, args.expect, "parallelism"))
}

#[derive(Serialize)]
struct GammaCertificate {
    space: SpaceDescriptor,
    budget: String,
    seed: u64,
    margin: f64,
    property_p_fails: bool,
    witness: GammaWitness,
}

fn gamma_cmd(args: GammaArgs) -> Result<Status> {
    positive("margin", args.margin)?;
    let witness = gamma_estimate_seeded(&args.space, args.budget, args.seed)?;
    let fails = witness.value > 1.0 + args.margin;
    let cert = GammaCertificate {
        space: args.space,
        budget: args.budget.to_string(),
        seed: args.seed,
        margin: args.margin,
        property_p_fails: fails,
        witness,
    };
    emit(&cert, args.output.as_deref())?;
    Ok(match args.expect {
        Some(GammaExpectation::Fails) if !fails => Status::CheckFailed(format!(
            "estimate {} does not exceed 1 + {}",
            cert.witness.value, args.margin
        )),
        Some(GammaExpectation::NotRefuted) if fails => {
            Status::CheckFailed(format!("estimate {} exceeds 1 + {}", cert.witness.value, args.margin))
        }
        _ => Status::Pass,
    })
}

#[derive(Serialize)]
struct GridRow {
    p: f64,
    q: f64,
    value: f64,
    #[serde(rename = "normA")]
    norm_a: f64,
    #[serde(rename = "normB")]
    norm_b: f64,
    starts: usize,
    iters: usize,
    wall_ms: u128,
}

fn axis(range: &[f64], step: f64, name: &str) -> Result<Vec<f64>> {
    let (lo, hi) = (range[0], range[1]);
    if !(1.0..=16.0).contains(&lo) || !(1.0..=16.0).contains(&hi) || lo > hi {
        bail!("{name}: range must satisfy 1 <= LO <= HI <= 16, got {lo},{hi}");
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|k| lo + k as f64 * step).collect())
}

fn gamma_grid_cmd(args: GammaGridArgs) -> Result<Status> {
    positive("step", args.step)?;
    positive("margin", args.margin)?;
    let (ps, qs) = match &args.points {
        Some(points) => {
            if points.iter().any(|v| !(1.0..=16.0).contains(v)) {
                bail!("points: exponents must lie in [1, 16]");
            }
            (points.clone(), points.clone())
        }
        None => (
            axis(&args.p_range, args.step, "p-range")?,
            axis(&args.q_range, args.step, "q-range")?,
        ),
    };
    let grid: Vec<(f64, f64)> = ps.iter().flat_map(|&p| qs.iter().map(move |&q| (p, q))).collect();
    let mut rows: Vec<GridRow> = grid
        .par_iter()
        .map(|&(p, q)| {
            let start = Instant::now();
            let w = gamma_estimate_seeded(&SpaceDescriptor::bpq(p, q)?, args.budget, args.seed)?;
            Ok(GridRow {
                p,
                q,
                value: w.value,
                norm_a: w.norm_a,
                norm_b: w.norm_b,
                starts: args.budget.starts,
                iters: args.budget.iters,
                wall_ms: start.elapsed().as_millis(),
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| a.p.total_cmp(&b.p).then(a.q.total_cmp(&b.q)));

    let sink: Box<dyn Write> = match &args.output {
        Some(path) => Box::new(fs::File::create(path).with_context(|| format!("writing {}", path.display()))?),
        None => Box::new(io::stdout()),
    };
    let mut writer = csv::Writer::from_writer(sink);
    for row in &rows {
        writer.serialize(row)?;
    }
    writer.flush()?;

    let low: Vec<String> = rows
        .iter()
        .filter(|r| r.p.max(r.q) > 1.0 && r.value <= 1.0 + args.margin)
        .map(|r| format!("({}, {}) = {}", r.p, r.q, r.value))
        .collect();
    Ok(if low.is_empty() {
        Status::Pass
    } else {
        Status::CheckFailed(format!("estimates not above 1 + {}: {}", args.margin, low.join(", ")))
    })
}

pub fn descent_options(
    pair: &OperatorPair,
    max_steps: usize,
    tol: f64,
    phases: Option<usize>,
) -> Result<DescentOptions> {
    positive("tol", tol)?;
    let mut options = DescentOptions::for_space(&pair.space);
    options.max_steps = max_steps;
    options.tol = tol;
    if let Some(m) = phases {
        if m == 0 {
            bail!("phases must be positive");
        }
        options.grid = GridSpec::with_phases(m);
    }
    Ok(options)
}

/// `Pass` unless a refuted trace fails to replay.
pub fn check_replay(trace: &RefutationTrace) -> Result<Status> {
    if trace.verdict.fact().is_none() {
        return Ok(Status::Pass);
    }
    let report = replay(trace)?;
    Ok(if report.reproduced {
        Status::Pass
    } else {
        Status::CheckFailed(format!(
            "terminal fact not reproduced (difference {:e})",
            report.difference
        ))
    })
}

fn descent_run_cmd(args: DescentRunArgs) -> Result<Status> {
    let pair = read_pair(&args.input)?;
    let options = descent_options(&pair, args.max_steps, args.tol, args.phases)?;
    let trace = descent_run(&pair, &options)?;
    emit(&trace, args.output.as_deref())?;
    eprintln!(
        "verdict: {}{}",
        trace.verdict.label(),
        trace.verdict.reason().map(|r| format!(" ({r})")).unwrap_or_default()
    );
    if let Some(expected) = &args.expect {
        if expected != trace.verdict.label() {
            return Ok(Status::CheckFailed(format!(
                "expected {expected}, got {}",
                trace.verdict.label()
            )));
        }
    }
    check_replay(&trace)
}

fn replay_cmd(path: &Path) -> Result<Status> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let trace: RefutationTrace = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let report = replay(&trace)?;
    emit(&report, None)?;
    Ok(if report.reproduced {
        Status::Pass
    } else {
        Status::CheckFailed(format!(
            "terminal fact not reproduced (difference {:e})",
            report.difference
        ))
    })
}

fn candidate_cmd(args: CandidateArgs) -> Result<Status> {
    let pair = match args.phases {
        Some(m) => grid_aligned_candidate(args.n, m, args.seed)?.0,
        None => generic_candidate(args.n, args.seed)?,
    };
    emit(&pair, args.output.as_deref())?;
    Ok(Status::Pass)
}
