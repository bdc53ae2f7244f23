//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bounds::{bound_report, entropy_gap, gamma_min_bound, MuStrategy, DEFAULT_SAMPLES};
use crate::conditions::{run_battery, ConditionReport};
use crate::groups::{parse_group, FiniteGroup};
use crate::io::{parse_list, parse_weights, read_text, report_json, write_text, StateSet};
use crate::protocol::{simulate_family, BranchRecord, ProtocolOptions};
use crate::states::{BipartitePureState, ShiftSide, ShiftedSetSpec};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const TOL_ENV: &str = "CLONEFORGE_TOL";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FIDELITY: i32 = 2;
pub const EXIT_BATTERY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "cloneforge", version, about = "Local cloning of group-shifted entangled states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the cloning protocol on every member of a group-shifted family.
    CloneSim(CloneSimArgs),
    /// Run the necessary-condition battery on a state-set file.
    CheckSet(CheckSetArgs),
    /// Blank-state entanglement bounds for a group-shifted family.
    BlankBounds(BoundsArgs),
    /// Tabulate bounds over a grid of Schmidt weights.
    Sweep(SweepArgs),
    /// Reproduce the headline results in one run.
    Demo(DemoArgs),
}

#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    /// Group name (Z4, Z2xZ2, S3, D4, Q8, cyclic(6), ...) or a JSON Cayley table.
    #[arg(long, required_unless_present = "spec")]
    pub group: Option<String>,
    /// Copies of the regular representation.
    #[arg(long, default_value_t = 1)]
    pub copies: usize,
    /// Comma-separated weights (normalized by their sum) or `uniform`.
    #[arg(long, default_value = "uniform")]
    pub weights: String,
    /// Side carrying the group shift.
    #[arg(long, value_enum, default_value_t = Side::B)]
    pub shift_side: Side,
    /// Shifted-set JSON file; replaces the flags above.
    #[arg(long, conflicts_with = "group")]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Tolerance; overrides the environment variable CLONEFORGE_TOL.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct CloneSimArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// `uniform`, a comma list of Schmidt weights, or a state-set file with one state.
    #[arg(long, default_value = "uniform")]
    pub blank: String,
    /// Omit the measurement and correction steps.
    #[arg(long)]
    pub skip_measurement: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CheckSetArgs {
    /// State-set JSON file.
    #[arg(long)]
    pub input: PathBuf,
    /// Optional blank: comma list of Schmidt weights or a state-set file with one state.
    #[arg(long)]
    pub blank: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MuChoice {
    Eq60,
    Uniform,
    Sampled,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Candidate blank Schmidt vector: `uniform` or a comma list.
    #[arg(long, default_value = "uniform")]
    pub blank: String,
    #[arg(long, value_enum, default_value_t = MuChoice::Eq60)]
    pub mu: MuChoice,
    /// Draws for `--mu sampled`.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Entropy base; defaults to the local dimension.
    #[arg(long)]
    pub base: Option<f64>,
    /// Also write a CSV grid table for this group.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Grid used with `--csv`.
    #[arg(long, default_value = "coarse")]
    pub grid: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub group: String,
    /// `coarse` (step 0.1), `fine` (step 0.05) or a step that divides 1.
    #[arg(long, default_value = "coarse")]
    pub grid: String,
    #[arg(long)]
    pub base: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DemoArgs {
    #[command(flatten)]
    pub output: OutputArgs,
}

/// A failure carrying its exit code and diagnostic.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn usage(message: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_USAGE, message: message.to_string() }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

pub fn execute(command: &Command) -> Result<i32, Failure> {
    match command {
        Command::CloneSim(a) => clone_sim(a),
        Command::CheckSet(a) => check_set(a),
        Command::BlankBounds(a) => blank_bounds(a),
        Command::Sweep(a) => sweep(a),
        Command::Demo(a) => demo(a),
    }
}

/// Flag, then environment, then default.
pub fn resolve_tolerance(flag: Option<f64>) -> Result<f64, Failure> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var(TOL_ENV) {
            Ok(s) => s.trim().parse::<f64>().map_err(|_| usage(format!("{TOL_ENV}={s:?} is not a number")))?,
            Err(_) => DEFAULT_TOL,
        },
    };
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(usage(format!("tolerance must be positive, got {tol}")));
    }
    Ok(tol)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => write_text(p, text).map_err(usage),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(usage)
        }
    }
}

fn group_arg(text: &str) -> Result<FiniteGroup, Failure> {
    let t = text.trim();
    if t.starts_with('[') {
        let cayley: Vec<Vec<usize>> = serde_json::from_str(t).map_err(usage)?;
        return FiniteGroup::from_table(format!("table({})", cayley.len()), cayley).map_err(usage);
    }
    parse_group(t).map_err(usage)
}

pub fn family_spec(f: &FamilyArgs) -> Result<ShiftedSetSpec, Failure> {
    if let Some(path) = &f.spec {
        let text = read_text(path).map_err(usage)?;
        return serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())));
    }
    let group = group_arg(f.group.as_deref().unwrap_or_default())?;
    if f.copies == 0 {
        return Err(usage("copies must be positive"));
    }
    let weights = parse_weights(&f.weights, group.order() * f.copies).map_err(usage)?;
    let side = match f.shift_side {
        Side::A => ShiftSide::A,
        Side::B => ShiftSide::B,
    };
    ShiftedSetSpec::new(group, f.copies, weights, None, side).map_err(usage)
}

fn blank_state(text: &str, d: usize) -> Result<BipartitePureState, Failure> {
    let t = text.trim();
    if t.eq_ignore_ascii_case("uniform") {
        return Ok(BipartitePureState::maximally_entangled(d));
    }
    let path = Path::new(t);
    let state = if path.exists() {
        let set = StateSet::read(path).map_err(usage)?;
        match <[BipartitePureState; 1]>::try_from(set.states) {
            Ok([s]) => s,
            Err(v) => return Err(usage(format!("blank file must hold one state, found {}", v.len()))),
        }
    } else {
        let gamma = parse_list(t).map_err(usage)?;
        BipartitePureState::from_schmidt_weights(&gamma).map_err(usage)?
    };
    if state.dims() != (d, d) {
        return Err(usage(format!("blank is {:?}, expected {d}x{d}", state.dims())));
    }
    Ok(state)
}

fn blank_gamma(text: &str, d: usize) -> Result<Vec<f64>, Failure> {
    let t = text.trim();
    if t.eq_ignore_ascii_case("uniform") {
        return Ok(vec![1.0 / d as f64; d]);
    }
    let g = parse_list(t).map_err(usage)?;
    if g.len() != d {
        return Err(usage(format!("blank needs {d} Schmidt weights, got {}", g.len())));
    }
    Ok(g)
}

#[derive(Debug, Serialize)]
struct CloneSimReport {
    group: FiniteGroup,
    copies: usize,
    weights: Vec<f64>,
    shift_side: ShiftSide,
    blank_schmidt: Vec<f64>,
    per_branch: Vec<BranchRecord>,
    min_fidelity: f64,
    input_independence_gap: f64,
    probability_sum_deviation: f64,
    measurement_skipped: bool,
    tolerance: f64,
    pass: bool,
}

pub fn clone_sim(a: &CloneSimArgs) -> Result<i32, Failure> {
    let tol = resolve_tolerance(a.output.tol)?;
    let spec = family_spec(&a.family)?;
    let blank = blank_state(&a.blank, spec.dimension())?;
    let options = ProtocolOptions { variant: None, skip_measurement: a.skip_measurement };
    let r = simulate_family(&spec, Some(&blank), options).map_err(usage)?;
    let pass = r.min_fidelity >= 1.0 - tol;
    let report = CloneSimReport {
        group: spec.group().clone(),
        copies: spec.copies(),
        weights: spec.weights().to_vec(),
        shift_side: spec.shift_side(),
        blank_schmidt: r.blank_schmidt,
        per_branch: r.per_branch,
        min_fidelity: r.min_fidelity,
        input_independence_gap: r.input_independence_gap,
        probability_sum_deviation: r.probability_sum_deviation,
        measurement_skipped: r.measurement_skipped,
        tolerance: tol,
        pass,
    };
    emit(a.output.out.as_deref(), &report_json("clone_sim", &report).map_err(usage)?)?;
    if !pass {
        eprintln!("fidelity deviation: min fidelity {} < 1 - {tol:e}", report.min_fidelity);
        return Ok(EXIT_FIDELITY);
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct CheckSetReport {
    #[serde(flatten)]
    conditions: ConditionReport,
    failed_checks: Vec<&'static str>,
}

pub fn check_set(a: &CheckSetArgs) -> Result<i32, Failure> {
    let set = StateSet::read(&a.input).map_err(usage)?;
    let (da, db) = set.dims;
    if da != db {
        return Err(usage(format!("state duals must be square, got {da}x{db}")));
    }
    let blank = a.blank.as_deref().map(|b| blank_state(b, da)).transpose()?;
    let conditions = run_battery(&set.states, blank.as_ref()).map_err(usage)?;
    let failed_checks = conditions.failed_checks();
    let pass = conditions.overall;
    emit(a.output.out.as_deref(), &report_json("check_set", &CheckSetReport { conditions, failed_checks: failed_checks.clone() }).map_err(usage)?)?;
    if !pass {
        eprintln!("condition battery failed: {}", failed_checks.join(", "));
        return Ok(EXIT_BATTERY);
    }
    Ok(EXIT_OK)
}

pub fn blank_bounds(a: &BoundsArgs) -> Result<i32, Failure> {
    let spec = family_spec(&a.family)?;
    let gamma = blank_gamma(&a.blank, spec.dimension())?;
    let strategy = match a.mu {
        MuChoice::Eq60 => MuStrategy::Eq60,
        MuChoice::Uniform => MuStrategy::Uniform,
        MuChoice::Sampled => MuStrategy::Sampled { samples: a.samples, seed: a.seed },
    };
    let report = bound_report(&spec, &gamma, &strategy, a.base).map_err(usage)?;
    if let Some(csv) = &a.csv {
        if spec.copies() != 1 {
            return Err(usage("--csv tables need a single copy"));
        }
        let table = sweep_csv(spec.group(), &a.grid, a.base)?;
        write_text(csv, &table).map_err(usage)?;
    }
    emit(a.output.out.as_deref(), &report_json("blank_bounds", &report).map_err(usage)?)?;
    Ok(EXIT_OK)
}

/// Grid step denominator: `coarse` 10, `fine` 20, or `1/step`.
pub fn grid_denominator(grid: &str) -> Result<usize, Failure> {
    match grid.trim() {
        "coarse" => Ok(10),
        "fine" => Ok(20),
        other => {
            let step: f64 = other.parse().map_err(|_| usage(format!("unknown grid {other:?}")))?;
            if !(step > 0.0 && step <= 1.0) {
                return Err(usage(format!("grid step must be in (0, 1], got {step}")));
            }
            let n = (1.0 / step).round();
            if (n * step - 1.0).abs() > 1e-9 || n > 10_000.0 {
                return Err(usage(format!("grid step {step} does not divide 1")));
            }
            Ok(n as usize)
        }
    }
}

/// Compositions of `total` into `parts` positive integers, lexicographic.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            if left >= 1 {
                cur.push(left);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        for k in 1..left.saturating_sub(parts - 2) {
            cur.push(k);
            rec(left - k, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts > 0 && total >= parts {
        rec(total, parts, &mut Vec::new(), &mut out);
    }
    out
}

fn sweep_row(group: &FiniteGroup, point: &[usize], denom: usize, base: Option<f64>) -> Result<String, Failure> {
    let weights: Vec<f64> = point.iter().map(|&k| k as f64 / denom as f64).collect();
    let spec = ShiftedSetSpec::simple(group.clone(), weights.clone()).map_err(usage)?;
    let gamma = gamma_min_bound(&spec, &MuStrategy::Eq60).map_err(usage)?.value;
    let gap = entropy_gap(&spec, base).map_err(usage)?.gap;
    let mut cells: Vec<String> = weights.iter().map(|w| w.to_string()).collect();
    cells.push(gamma.to_string());
    cells.push(gap.to_string());
    Ok(cells.join(","))
}

/// CSV of `l0..l{D-1},gamma_min_lower,entropy_gap` over positive grid points.
pub fn sweep_csv(group: &FiniteGroup, grid: &str, base: Option<f64>) -> Result<String, Failure> {
    let denom = grid_denominator(grid)?;
    let d = group.order();
    let points = compositions(denom, d);
    if points.is_empty() {
        return Err(usage(format!("grid {grid:?} has no positive points for dimension {d}")));
    }
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(points.len());
    let chunk = points.len().div_ceil(workers);
    let rows: Vec<Result<Vec<String>, Failure>> = std::thread::scope(|s| {
        let handles: Vec<_> = points
            .chunks(chunk)
            .map(|c| s.spawn(move || c.iter().map(|p| sweep_row(group, p, denom, base)).collect()))
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let mut out = String::new();
    let header: Vec<String> = (0..d).map(|i| format!("l{i}")).chain(["gamma_min_lower".into(), "entropy_gap".into()]).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for chunk_rows in rows {
        for row in chunk_rows? {
            out.push_str(&row);
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn sweep(a: &SweepArgs) -> Result<i32, Failure> {
    let group = group_arg(&a.group)?;
    let csv = sweep_csv(&group, &a.grid, a.base)?;
    emit(a.output.out.as_deref(), &csv)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct DemoProtocol {
    group: String,
    weights: Vec<f64>,
    min_fidelity: f64,
    input_independence_gap: f64,
}

#[derive(Debug, Serialize)]
struct DemoBound {
    group: String,
    weights: Vec<f64>,
    gamma_min_lower: f64,
}

#[derive(Debug, Serialize)]
struct DemoGap {
    group: String,
    weights: Vec<f64>,
    base: f64,
    q: Vec<f64>,
    shannon_q: f64,
    entropy_lambda: f64,
    gap: f64,
}

#[derive(Debug, Serialize)]
struct DemoReport {
    protocol: Vec<DemoProtocol>,
    maximally_entangled_blank_bounds: Vec<DemoBound>,
    entropy_gap: DemoGap,
    tolerance: f64,
    pass: bool,
}

pub fn demo(a: &DemoArgs) -> Result<i32, Failure> {
    let tol = resolve_tolerance(a.output.tol)?;
    let mut protocol = Vec::new();
    for (g, w) in [("Z3", vec![0.5, 0.3, 0.2]), ("S3", vec![0.3, 0.25, 0.2, 0.12, 0.08, 0.05])] {
        let spec = ShiftedSetSpec::simple(parse_group(g).map_err(usage)?, w.clone()).map_err(usage)?;
        let r = simulate_family(&spec, None, ProtocolOptions::default()).map_err(usage)?;
        protocol.push(DemoProtocol {
            group: g.into(),
            weights: w,
            min_fidelity: r.min_fidelity,
            input_independence_gap: r.input_independence_gap,
        });
    }
    let mut bounds = Vec::new();
    for (g, w) in [("Z2", vec![0.7, 0.3]), ("Z3", vec![0.5, 0.3, 0.2])] {
        let spec = ShiftedSetSpec::simple(parse_group(g).map_err(usage)?, w.clone()).map_err(usage)?;
        let value = gamma_min_bound(&spec, &MuStrategy::Eq60).map_err(usage)?.value;
        bounds.push(DemoBound { group: g.into(), weights: w, gamma_min_lower: value });
    }
    let spec = ShiftedSetSpec::simple(parse_group("Z2").map_err(usage)?, vec![0.7, 0.3]).map_err(usage)?;
    let e = entropy_gap(&spec, Some(2.0)).map_err(usage)?;
    let pass = protocol.iter().all(|p| p.min_fidelity >= 1.0 - tol);
    let report = DemoReport {
        protocol,
        maximally_entangled_blank_bounds: bounds,
        entropy_gap: DemoGap {
            group: "Z2".into(),
            weights: vec![0.7, 0.3],
            base: e.base,
            q: e.q,
            shannon_q: e.shannon_q,
            entropy_lambda: e.entropy_lambda,
            gap: e.gap,
        },
        tolerance: tol,
        pass,
    };
    emit(a.output.out.as_deref(), &report_json("demo", &report).map_err(usage)?)?;
    Ok(if pass { EXIT_OK } else { EXIT_FIDELITY })
}
