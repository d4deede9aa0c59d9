//! Command-line front end for `randtoep`.
//!
//! Configuration precedence: built-in defaults, then the JSON config file,
//! then command-line flags. Every command prints the master seed it used on
//! stderr, so any output can be regenerated from its own log.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use randtoep::bounds::{bounds_report, BoundConstants};
use randtoep::ensembles::build_matrix;
use randtoep::entries::sample_entries;
use randtoep::experiments::{
    ratio_points, read_csv, render_svg, run_sweep, summary_json, write_csv, ExperimentConfig, SweepOutput,
};
use randtoep::linalg::{spectral_norm, IterativeOptions, DEFAULT_TOL};
use randtoep::trigpoly::matrix_process_sup;
use randtoep::{DistributionSpec, EnsembleKind, Error, NormMethod, StructuredMatrix, TrigProcessKind};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "RANDTOEP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "randtoep", version, about = "Spectral norms of random Toeplitz-type matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw one random matrix and write its coefficient vector as JSON.
    Sample(SampleArgs),
    /// Spectral norm of a coefficient file.
    Norm(NormArgs),
    /// Certified supremum of a trigonometric process of a coefficient file.
    Suptrig(SuptrigArgs),
    /// Evaluate the bound calculators at one dimension.
    Bounds(BoundsArgs),
    /// Run a Monte Carlo sweep and write CSV / JSON / SVG results.
    Sweep(SweepArgs),
    /// Plot a results CSV as SVG.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub ensemble: EnsembleKind,
    /// Entry law: a name (`rademacher`, `gaussian_std`, `uniform_symmetric`) or a JSON spec. Repeat to cycle.
    #[arg(long, required = true)]
    pub dist: Vec<String>,
    #[arg(long)]
    pub n: usize,
    /// Master seed; drawn from the clock when absent.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NormArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, default_value_t = randtoep::experiments::DEFAULT_AUTO_DENSE_CAP)]
    pub dense_cap: usize,
    /// Seed of the Krylov start vector.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SuptrigArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub process: ProcessArg,
    #[arg(long, default_value_t = randtoep::experiments::DEFAULT_GRID_FACTOR)]
    pub grid_factor: usize,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long = "K", default_value_t = 1.0)]
    pub k: f64,
    #[arg(long = "b", default_value_t = 1.0)]
    pub b: f64,
    #[arg(long = "c", default_value_t = 1.0)]
    pub c: f64,
    #[arg(long = "A", default_value_t = 1.0)]
    pub a: f64,
    #[arg(long = "K-kt", default_value_t = 1.0)]
    pub k_kt: f64,
    #[arg(long = "B", default_value_t = 1.0)]
    pub b_abs: f64,
}

/// Flags that override config-file fields.
#[derive(Debug, Default, Args)]
pub struct ConfigOverrides {
    #[arg(long)]
    pub ensemble: Option<EnsembleKind>,
    /// Replaces the config's entry laws; repeat to cycle.
    #[arg(long)]
    pub dist: Vec<String>,
    /// Comma-separated dimensions, e.g. `256,1024,4096`.
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub grid_factor: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub dense_cap: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub mean_shift: Option<f64>,
    /// Comma-separated processes to evaluate, e.g. `upper_Y,fejer_lower`; `none` disables all.
    #[arg(long, value_delimiter = ',')]
    pub processes: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "csv,json,svg")]
    pub format: Vec<Format>,
    #[command(flatten)]
    pub overrides: ConfigOverrides,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub svg: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Dense,
    Iterative,
    Auto,
}

impl From<MethodArg> for NormMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Dense => NormMethod::Dense,
            MethodArg::Iterative => NormMethod::Iterative,
            MethodArg::Auto => NormMethod::Auto,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProcessArg {
    #[value(name = "upper_Y")]
    UpperY,
    #[value(name = "fejer_lower")]
    FejerLower,
    #[value(name = "plain_Z")]
    PlainZ,
}

impl From<ProcessArg> for TrigProcessKind {
    fn from(p: ProcessArg) -> Self {
        match p {
            ProcessArg::UpperY => TrigProcessKind::UpperY,
            ProcessArg::FejerLower => TrigProcessKind::FejerLower,
            ProcessArg::PlainZ => TrigProcessKind::PlainZ,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or config (exit 2).
    Config(String),
    /// Failure while computing or writing results (exit 3).
    Runtime(String),
    /// A run completed but violated an invariant (exit 4).
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Invariant(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
            CliError::Invariant(m) => write!(f, "invariant violated: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Library errors that stem from bad input are config errors; the rest are runtime errors.
fn classify(e: Error) -> CliError {
    match e {
        Error::Io(_) | Error::Csv(_) | Error::NotConverged(_) => runtime_err(e),
        _ => config_err(e),
    }
}

/// Parses `--dist`: a distribution name or a JSON spec object.
pub fn parse_dist(s: &str) -> Result<DistributionSpec, CliError> {
    let text = s.trim();
    let json = if text.starts_with('{') {
        text.to_string()
    } else {
        serde_json::json!({ "kind": text }).to_string()
    };
    serde_json::from_str(&json).map_err(|e| CliError::Config(format!("invalid --dist `{s}`: {e}")))
}

fn clock_seed() -> u64 {
    let nanos = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos()).unwrap_or(0);
    randtoep::entries::derive_seed(nanos as u64, &[std::process::id() as u64])
}

/// Resolves a sweep config: file values, then flag overrides, then defaults.
/// A missing seed is drawn from the clock.
pub fn parse_config(path: Option<&Path>, overrides: &ConfigOverrides) -> Result<ExperimentConfig, CliError> {
    let mut obj = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            match serde_json::from_str::<Value>(&text) {
                Ok(Value::Object(m)) => m,
                Ok(_) => return Err(CliError::Config(format!("{}: config must be a JSON object", p.display()))),
                Err(e) => return Err(CliError::Config(format!("{}: malformed JSON: {e}", p.display()))),
            }
        }
        None => Map::new(),
    };
    apply_overrides(&mut obj, overrides)?;
    if !obj.contains_key("seed") && !obj.contains_key("master_seed") {
        obj.insert("seed".into(), Value::from(clock_seed()));
    }
    let config: ExperimentConfig = serde_json::from_value(Value::Object(obj)).map_err(config_err)?;
    config.validate().map_err(config_err)?;
    Ok(config)
}

fn apply_overrides(obj: &mut Map<String, Value>, o: &ConfigOverrides) -> Result<(), CliError> {
    let mut set = |key: &str, v: Value| {
        if key == "seed" {
            obj.remove("master_seed");
        }
        if key == "dist" {
            obj.remove("specs");
        }
        obj.insert(key.to_string(), v);
    };
    if let Some(e) = o.ensemble {
        set("ensemble", Value::from(e.name()));
    }
    if !o.dist.is_empty() {
        let specs = o.dist.iter().map(|d| parse_dist(d)).collect::<Result<Vec<_>, _>>()?;
        set("dist", serde_json::to_value(specs).map_err(config_err)?);
    }
    if let Some(n) = &o.n_list {
        set("n_list", Value::from(n.clone()));
    }
    if let Some(r) = o.replications {
        set("replications", Value::from(r));
    }
    if let Some(s) = o.seed {
        set("seed", Value::from(s));
    }
    if let Some(m) = o.method {
        set("norm_method", serde_json::to_value(NormMethod::from(m)).map_err(config_err)?);
    }
    if let Some(t) = o.tol {
        set("tol", Value::from(t));
    }
    if let Some(g) = o.grid_factor {
        set("grid_factor", Value::from(g));
    }
    if let Some(m) = o.max_iter {
        set("max_iter", Value::from(m));
    }
    if let Some(c) = o.dense_cap {
        set("dense_cap", Value::from(c));
    }
    if let Some(m) = o.mean_shift {
        set("mean_shift", Value::from(m));
    }
    if let Some(ps) = &o.processes {
        let mut flags = serde_json::json!({ "upper_Y": false, "fejer_lower": false, "plain_Z": false });
        for p in ps {
            match p.as_str() {
                "none" => {}
                "upper_Y" | "fejer_lower" | "plain_Z" => flags[p.as_str()] = Value::Bool(true),
                other => return Err(CliError::Config(format!("unknown process `{other}`"))),
            }
        }
        set("processes", flags);
    }
    Ok(())
}

/// Writes the requested renderings of a sweep into `out_dir` and returns the paths.
pub fn emit_report(output: &SweepOutput, formats: &[Format], out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    if output.records.is_empty() {
        return Err(CliError::Runtime("nothing to report: no records".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut written = Vec::new();
    for format in formats {
        let (name, bytes) = match format {
            Format::Csv => {
                let mut buf = Vec::new();
                write_csv(&output.records, &mut buf).map_err(classify)?;
                ("results.csv", buf)
            }
            Format::Json => ("summary.json", summary_json(&output.summary).map_err(classify)?.into_bytes()),
            Format::Svg => ("ratio.svg", render_svg(&ratio_points(&output.records)).map_err(classify)?.into_bytes()),
        };
        let path = out_dir.join(name);
        write_file(&path, &bytes)?;
        written.push(path);
    }
    Ok(written)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_file(p, text.as_bytes()),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(runtime_err),
    }
}

fn read_matrix(path: &Path) -> Result<StructuredMatrix, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn to_json(v: &impl serde::Serialize) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(runtime_err)?;
    s.push('\n');
    Ok(s)
}

/// Sets the global thread pool size from [`THREADS_ENV`], if present.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(runtime_err)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Sample(a) => {
            let seed = a.seed.unwrap_or_else(clock_seed);
            eprintln!("master_seed={seed}");
            let specs = a.dist.iter().map(|d| parse_dist(d)).collect::<Result<Vec<_>, _>>()?;
            if a.n == 0 {
                return Err(config_err(Error::ZeroDimension));
            }
            let entries = sample_entries(&specs, a.ensemble.coeff_len(a.n), seed).map_err(classify)?;
            let matrix = build_matrix(a.ensemble, &entries, a.n).map_err(classify)?;
            emit(a.out.as_deref(), &to_json(&matrix)?)
        }
        Command::Norm(a) => {
            eprintln!("master_seed={}", a.seed);
            let matrix = read_matrix(&a.input)?;
            let method = NormMethod::from(a.method);
            if method == NormMethod::Dense && matrix.n() > a.dense_cap {
                return Err(CliError::Config(format!(
                    "--method dense with n = {} exceeds --dense-cap {}; raise --dense-cap or use iterative/auto",
                    matrix.n(),
                    a.dense_cap
                )));
            }
            let opts = IterativeOptions {
                tol: a.tol,
                max_iter: a.max_iter,
                probe_seed: a.seed,
            };
            match spectral_norm(&matrix, method, &opts, a.dense_cap) {
                Ok(est) => emit(None, &to_json(&est)?),
                Err(Error::NotConverged(est)) => {
                    emit(None, &to_json(&est)?)?;
                    Err(CliError::Runtime("iterative solver did not converge".into()))
                }
                Err(e) => Err(classify(e)),
            }
        }
        Command::Suptrig(a) => {
            eprintln!("master_seed=none");
            let matrix = read_matrix(&a.input)?;
            if a.grid_factor == 0 {
                return Err(CliError::Config("--grid-factor must be ≥ 1".into()));
            }
            let m = a.grid_factor * matrix.n().max(8);
            let sup = matrix_process_sup(&matrix, a.process.into(), m).map_err(classify)?;
            emit(None, &to_json(&sup)?)
        }
        Command::Bounds(a) => {
            eprintln!("master_seed=none");
            let consts = BoundConstants {
                k_dudley: a.k,
                b_subg: a.b,
                c_tail: a.c,
                k_kt: a.k_kt,
                a_conc: a.a,
                b_abs: a.b_abs,
            };
            let report = bounds_report(a.n, consts).map_err(classify)?;
            emit(None, &to_json(&report)?)
        }
        Command::Sweep(a) => {
            let config = parse_config(a.config.as_deref(), &a.overrides)?;
            eprintln!("master_seed={}", config.master_seed);
            let output = run_sweep(&config).map_err(classify)?;
            for path in emit_report(&output, &a.format, &a.out_dir)? {
                eprintln!("wrote {}", path.display());
            }
            let s = &output.summary;
            if s.unconverged > 0 {
                eprintln!("warning: {} of {} trials did not converge", s.unconverged, s.total_records);
            }
            if s.sandwich_violations > 0 {
                return Err(CliError::Invariant(format!(
                    "{} of {} trials violate fejer_lower ≤ ‖T‖ ≤ certified sup|Y|",
                    s.sandwich_violations, s.total_records
                )));
            }
            Ok(())
        }
        Command::Report(a) => {
            eprintln!("master_seed=none");
            let file = fs::File::open(&a.input).map_err(|e| CliError::Config(format!("cannot read {}: {e}", a.input.display())))?;
            let rows = read_csv(file).map_err(config_err)?;
            if let Some(seed) = rows.first().map(|r| r.seed) {
                eprintln!("first trial seed={seed}");
            }
            let points: Vec<(usize, f64)> = rows
                .iter()
                .filter(|r| r.converged())
                .filter_map(|r| r.ratio_sqrt_nlogn.map(|v| (r.n, v)))
                .collect();
            let svg = render_svg(&points).map_err(runtime_err)?;
            write_file(&a.svg, svg.as_bytes())
        }
    }
}
