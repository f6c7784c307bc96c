//! `mmm`: trajectories, certified sweeps, σ tables and fixture checks for
//! the mean-median map.

#![allow(clippy::result_large_err)]

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mmm_core::certify::{StopReason, SweepConfig, SweepError, Sweeper};
use mmm_core::fixtures::{FixtureSet, Tier};
use mmm_core::record::PieceRecord;
use mmm_core::stream::{
    infer_direction, merge_sides, read_records, run_sweep_to_file, sigma_table, summarize, RunEnd,
    RunError, RunOptions, SigmaTableError, SweepSummary,
};
use mmm_core::verify::{verify, Status, VerifyOptions};
use mmm_core::{run_trajectory, Rational, RunLimit, Side, TrajectoryError};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NOT_TERMINATED: u8 = 3;
const EXIT_EPS_UNDERFLOW: u8 = 4;
const EXIT_FIXTURE_FAILURE: u8 = 5;

const THRESHOLD_ENV: &str = "MMM_THRESHOLD";

#[derive(Parser)]
#[command(
    name = "mmm",
    version,
    about = "Exact mean-median sequences and certified pieces of m(x)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the iteration from {0, x, 1} and print L and m.
    Traj(TrajArgs),
    /// Certify atoms away from a seed, streaming one piece per line.
    Sweep(SweepArgs),
    /// Print the segments and corners of a sweep or of existing piece files.
    Corners(CornersArgs),
    /// Print σ transitions between consecutive atoms of one subinterval.
    Sigma(SigmaArgs),
    /// Check the built-in or a given fixture file against concrete runs.
    VerifyPaper(VerifyArgs),
}

#[derive(Args)]
struct TrajArgs {
    /// Starting point p/q in (0, 1).
    x: Rational,
    /// Highest index to compute before giving up.
    #[arg(long, env = THRESHOLD_ENV)]
    threshold: Option<usize>,
    /// Include every point and running median in the output.
    #[arg(long)]
    emit_points: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Direction {
    Left,
    Right,
    Both,
}

#[derive(Args)]
struct SweepArgs {
    /// Starting point p/q in (0, 1).
    #[arg(long)]
    seed: Rational,
    /// Side of the seed to sweep.
    #[arg(long, value_enum, default_value = "right")]
    direction: Direction,
    /// Initial probe step.
    #[arg(long, default_value = "1/100000")]
    eps0: Rational,
    /// Smallest probe step tried before giving up (default 10^-60).
    #[arg(long)]
    eps_floor: Option<Rational>,
    /// Stop after this many atoms (per side).
    #[arg(long)]
    max_atoms: Option<u64>,
    /// Stop once the frontier reaches this point.
    #[arg(long)]
    target: Option<Rational>,
    /// Stop after the first atom of this many distinct m forms.
    #[arg(long)]
    max_segments: Option<u64>,
    /// Piece file. With `--direction both` the sides go to `<out>.left`
    /// and `<out>.right` and the merged stream to `<out>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Continue from the journal next to `--out`.
    #[arg(long, requires = "out")]
    resume: bool,
    /// Record each atom's driving list (needed by `sigma`).
    #[arg(long)]
    with_driving: bool,
    /// Highest index to compute before giving up.
    #[arg(long, env = THRESHOLD_ENV)]
    threshold: Option<usize>,
    /// Return once this many pieces are on disk, leaving the journal in place.
    #[arg(long, hide = true, requires = "out")]
    stop_after_pieces: Option<u64>,
}

#[derive(Args)]
struct CornersArgs {
    /// Summarize these piece files instead of sweeping.
    #[arg(long = "in", conflicts_with = "seed", num_args = 1..)]
    inputs: Vec<PathBuf>,
    #[command(flatten)]
    sweep: OptionalSweep,
}

#[derive(Args)]
struct OptionalSweep {
    /// Sweep from this point instead of reading files.
    #[arg(long)]
    seed: Option<Rational>,
    #[arg(long, value_enum, default_value = "right")]
    direction: Direction,
    #[arg(long, default_value = "1/100000")]
    eps0: Rational,
    #[arg(long)]
    eps_floor: Option<Rational>,
    #[arg(long)]
    max_atoms: Option<u64>,
    #[arg(long)]
    target: Option<Rational>,
    #[arg(long)]
    max_segments: Option<u64>,
    /// Also keep the swept pieces in this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Highest index to compute before giving up.
    #[arg(long, env = THRESHOLD_ENV)]
    threshold: Option<usize>,
}

#[derive(Args)]
struct SigmaArgs {
    /// Piece file written with `--with-driving`.
    #[arg(long = "in")]
    input: PathBuf,
    /// Subinterval number, counted from 1 in stream order.
    #[arg(long)]
    subinterval: usize,
    /// Print one JSON object per row instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// `quick`, or `long` (alias `full`) which also runs the quick fixtures.
    #[arg(long, default_value = "quick")]
    tier: Tier,
    /// Fixture file; defaults to the built-in set.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Write the full report as JSON to this file.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Highest index to compute before giving up.
    #[arg(long, env = THRESHOLD_ENV)]
    threshold: Option<usize>,
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl ToString) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        let code = match &e {
            RunError::Sweep(SweepError::NotTerminated { .. }) => EXIT_NOT_TERMINATED,
            RunError::Sweep(SweepError::EpsUnderflow { .. }) => EXIT_EPS_UNDERFLOW,
            RunError::Sweep(SweepError::InvalidConfig(_))
            | RunError::JournalMismatch { .. }
            | RunError::Journal(_)
            | RunError::TruncatedOutput { .. } => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        Failure::new(code, e)
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        RunError::Sweep(e).into()
    }
}

type CliResult = Result<(), Failure>;

fn limit(threshold: Option<usize>) -> Result<RunLimit, Failure> {
    threshold
        .map_or(Ok(RunLimit::default()), RunLimit::new)
        .map_err(|e| Failure::new(EXIT_USAGE, e))
}

/// Writes one line to stdout. A closed pipe (`mmm ... | head`) is not an
/// error worth reporting.
fn emit(line: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn print_json<T: Serialize>(value: &T) {
    emit(&serde_json::to_string_pretty(value).expect("output serializes"));
}

#[derive(Serialize)]
struct TrajOutput<'a> {
    #[serde(rename = "L")]
    len: usize,
    m: &'a Rational,
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<&'a [Rational]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    medians: Option<&'a [Rational]>,
}

fn cmd_traj(args: TrajArgs) -> CliResult {
    let t = run_trajectory(&args.x, limit(args.threshold)?).map_err(|e| match e {
        TrajectoryError::NotTerminated(_) => Failure::new(EXIT_NOT_TERMINATED, e),
        other => Failure::new(EXIT_USAGE, other),
    })?;
    let out = TrajOutput {
        len: t.len,
        m: &t.m,
        points: args.emit_points.then_some(t.points.as_slice()),
        medians: args.emit_points.then_some(t.medians.as_slice()),
    };
    emit(&serde_json::to_string(&out).expect("output serializes"));
    Ok(())
}

struct SweepPlan {
    seed: Rational,
    direction: Direction,
    eps0: Rational,
    eps_floor: Option<Rational>,
    max_atoms: Option<u64>,
    target: Option<Rational>,
    max_segments: Option<u64>,
    threshold: Option<usize>,
}

impl SweepPlan {
    fn config(&self, side: Side) -> Result<SweepConfig, Failure> {
        let mut cfg = SweepConfig::new(self.seed.clone(), side);
        cfg.eps0 = self.eps0.clone();
        if let Some(floor) = &self.eps_floor {
            cfg.eps_floor = floor.clone();
        }
        cfg.limit = limit(self.threshold)?;
        cfg.stop.max_atoms = self.max_atoms;
        cfg.stop.target = self.target.clone();
        cfg.stop.max_segments = self.max_segments;
        cfg.validate().map_err(|e| Failure::new(EXIT_USAGE, e))?;
        Ok(cfg)
    }

    fn sides(&self) -> Vec<Side> {
        match self.direction {
            Direction::Left => vec![Side::Left],
            Direction::Right => vec![Side::Right],
            Direction::Both => vec![Side::Left, Side::Right],
        }
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

#[derive(Serialize)]
struct SweepReport {
    stopped: Vec<Option<StopReason>>,
    #[serde(flatten)]
    summary: SweepSummary,
}

/// Runs every side of `plan`, concurrently when there are two, and returns
/// the merged piece stream plus how each side ended.
fn run_plan(
    plan: &SweepPlan,
    out: Option<&Path>,
    opts: &RunOptions,
) -> Result<(Vec<PieceRecord>, Vec<Option<StopReason>>), Failure> {
    let sides = plan.sides();
    let configs = sides
        .iter()
        .map(|&s| plan.config(s))
        .collect::<Result<Vec<_>, _>>()?;
    let both = sides.len() == 2;
    let side_path = |side: Side| {
        out.map(|o| {
            if both {
                with_suffix(o, &format!(".{side}"))
            } else {
                o.to_path_buf()
            }
        })
    };

    let run_side = |cfg: &SweepConfig| -> Result<(Vec<PieceRecord>, Option<StopReason>), Failure> {
        match side_path(cfg.direction) {
            Some(path) => {
                let outcome = run_sweep_to_file(cfg, &path, opts)?;
                let reason = match outcome.end {
                    RunEnd::Stopped(r) => Some(r),
                    RunEnd::Interrupted => None,
                };
                Ok((read_records(&path)?, reason))
            }
            None => {
                let (pieces, reason) = Sweeper::new(cfg.clone())?.run_to_end()?;
                let records = pieces
                    .iter()
                    .map(|p| PieceRecord::from_piece(p, opts.with_driving))
                    .collect();
                Ok((records, Some(reason)))
            }
        }
    };

    let results: Vec<_> = if both {
        std::thread::scope(|scope| {
            let handles: Vec<_> = configs
                .iter()
                .map(|c| scope.spawn(|| run_side(c)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sweep worker panicked"))
                .collect()
        })
    } else {
        configs.iter().map(run_side).collect()
    };
    let mut streams = Vec::new();
    let mut reasons = Vec::new();
    for r in results {
        let (records, reason) = r?;
        streams.push(records);
        reasons.push(reason);
    }

    let merged = match streams.as_slice() {
        [left, right] => {
            let merged = merge_sides(left, right);
            if let Some(o) = out {
                write_stream(o, &merged)?;
            }
            merged
        }
        _ => streams.pop().expect("one side"),
    };
    Ok((merged, reasons))
}

fn write_stream(path: &Path, records: &[PieceRecord]) -> CliResult {
    let mut text = String::new();
    for r in records {
        text.push_str(&r.to_line());
        text.push('\n');
    }
    std::fs::write(path, text)
        .map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", path.display())))
}

fn summary_of(records: &[PieceRecord]) -> Result<SweepSummary, Failure> {
    summarize(records, infer_direction(records)).map_err(|e| Failure::new(EXIT_FAILURE, e))
}

fn cmd_sweep(args: SweepArgs) -> CliResult {
    let plan = SweepPlan {
        seed: args.seed,
        direction: args.direction,
        eps0: args.eps0,
        eps_floor: args.eps_floor,
        max_atoms: args.max_atoms,
        target: args.target,
        max_segments: args.max_segments,
        threshold: args.threshold,
    };
    let opts = RunOptions {
        with_driving: args.with_driving,
        resume: args.resume,
        journal: None,
        stop_after_pieces: args.stop_after_pieces,
    };
    let (records, stopped) = run_plan(&plan, args.out.as_deref(), &opts)?;
    print_json(&SweepReport {
        stopped,
        summary: summary_of(&records)?,
    });
    Ok(())
}

#[derive(Serialize)]
struct CornersReport {
    segments: Vec<mmm_core::stream::SegmentSummary>,
    corners: Vec<Rational>,
}

fn cmd_corners(args: CornersArgs) -> CliResult {
    let records = if args.inputs.is_empty() {
        let s = args.sweep;
        let seed = s
            .seed
            .ok_or_else(|| Failure::new(EXIT_USAGE, "either --seed or --in is required"))?;
        let plan = SweepPlan {
            seed,
            direction: s.direction,
            eps0: s.eps0,
            eps_floor: s.eps_floor,
            max_atoms: s.max_atoms,
            target: s.target,
            max_segments: s.max_segments,
            threshold: s.threshold,
        };
        run_plan(&plan, s.out.as_deref(), &RunOptions::default())?.0
    } else {
        let mut streams = args
            .inputs
            .iter()
            .map(|p| read_records(p))
            .collect::<Result<Vec<_>, _>>()?;
        match streams.len() {
            1 => streams.pop().expect("one stream"),
            2 => {
                let (a, b) = (&streams[0], &streams[1]);
                let (left, right) = if infer_direction(a) == Side::Left {
                    (a, b)
                } else {
                    (b, a)
                };
                merge_sides(left, right)
            }
            n => {
                return Err(Failure::new(
                    EXIT_USAGE,
                    format!("expected one or two piece files, got {n}"),
                ))
            }
        }
    };
    let summary = summary_of(&records)?;
    print_json(&CornersReport {
        segments: summary.segments,
        corners: summary.corners,
    });
    Ok(())
}

fn cmd_sigma(args: SigmaArgs) -> CliResult {
    let records = read_records(&args.input)?;
    let rows = sigma_table(&records, args.subinterval).map_err(|e| {
        let code = match e {
            SigmaTableError::MissingDriving | SigmaTableError::NoSuchSubinterval { .. } => {
                EXIT_USAGE
            }
            _ => EXIT_FAILURE,
        };
        Failure::new(code, e)
    })?;
    for row in rows {
        if args.json {
            emit(&serde_json::to_string(&row).expect("row serializes"));
        } else {
            emit(&format!("{}\t{}", row.j, row.cycles));
        }
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> CliResult {
    let set = match &args.fixtures {
        Some(path) => FixtureSet::load(path)
            .map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))?,
        None => FixtureSet::builtin(),
    };
    let opts = VerifyOptions {
        tier: args.tier,
        limit: limit(args.threshold)?,
        ..Default::default()
    };
    let report = verify(&set, &opts);
    for f in &report.fixtures {
        let status = match f.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Skipped => "skip",
            Status::Rejected => "rejected",
        };
        let detail = f
            .detail
            .as_deref()
            .map(|d| format!("  {d}"))
            .unwrap_or_default();
        emit(&format!(
            "{status:<8} {:<34} {:>9.1} ms{detail}",
            f.id, f.wall_ms
        ));
    }
    for g in &report.groups {
        let status = if g.status == Status::Pass {
            "pass"
        } else {
            "FAIL"
        };
        emit(&format!("{status:<8} group {}: {}", g.id, g.detail));
    }
    emit(&format!(
        "{} passed, {} failed, {} skipped in {:.1} ms",
        report.passed, report.failed, report.skipped, report.wall_ms
    ));
    if let Some(path) = &args.report {
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        std::fs::write(path, text + "\n")
            .map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", path.display())))?;
    }
    if report.ok() {
        Ok(())
    } else {
        Err(Failure::new(
            EXIT_FIXTURE_FAILURE,
            format!("{} fixture checks failed", report.failed),
        ))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Traj(a) => cmd_traj(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Corners(a) => cmd_corners(a),
        Command::Sigma(a) => cmd_sigma(a),
        Command::VerifyPaper(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("mmm: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
