//! Command-line front end.
//!
//! Every subcommand reads an optional TOML config and then applies flag
//! overrides. Exit codes: 0 success, 2 usage or configuration error, 3 data
//! error, 4 numerical failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::likelihood::InitScheme;
use crate::mc::{run_consistency, run_normality, MonteCarloReport};
use crate::model::{InnovationDist, PGarchSpec, Series};
use crate::qmle::{fit, FitOptions};
use crate::simulation::{simulate_path, SimConfig, DEFAULT_BURN_IN_YEARS};
use crate::stationarity::{
    beta_spectral_radius, lyapunov_mc_with_z, moment_delta_search, stationarity_report, DeltaSearchResult,
    LyapunovEstimate, DEFAULT_N0_MAX, DEFAULT_Z,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// A failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn data(message: impl Into<String>) -> Self {
        Self { code: EXIT_DATA, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidSpec(_) | Error::Order(_) | Error::InvalidArgument(_) => EXIT_USAGE,
            Error::DimensionMismatch { .. }
            | Error::InsufficientData(_)
            | Error::EmptyInput(_)
            | Error::Degenerate(_) => EXIT_DATA,
            Error::SingularInformation { .. }
            | Error::AllStartsFailed { .. }
            | Error::Precondition(_)
            | Error::ExcessiveExclusions { .. } => EXIT_NUMERICAL,
        };
        Self { code, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "pgarch", version, about = "Periodic GARCH simulation, stationarity analysis and QMLE")]
struct Cli {
    /// Worker threads for parallel sections (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a path and write CSV with columns t, season, y, h.
    Simulate(SimulateArgs),
    /// Fit a model to a CSV column and write the result as JSON.
    Fit(FitArgs),
    /// Estimate the top Lyapunov exponent.
    Lyapunov(LyapunovArgs),
    /// Summarize the strict stationarity decision.
    Stationarity(StationarityArgs),
    /// Run a replicated simulate-then-fit experiment.
    Montecarlo(MonteCarloArgs),
}

#[derive(Debug, Args, Default)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
struct ModelFlags {
    #[arg(long)]
    period: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    /// Comma-separated seasonal intercepts.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    omega: Option<Vec<f64>>,
    /// Comma-separated ARCH coefficients, season-major.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    alpha: Option<Vec<f64>>,
    /// Comma-separated GARCH coefficients, season-major.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    beta: Option<Vec<f64>>,
    /// `gaussian`, `student-t:<dof>` or `unit`.
    #[arg(long)]
    dist: Option<String>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelFlags,
    #[arg(long)]
    n_years: Option<usize>,
    /// Burn-in in years.
    #[arg(long)]
    burn_in_years: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
enum InitArg {
    Omega,
    Sample,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    common: Common,
    /// Input CSV with a header row.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Value column (defaults to `y`, or the only column).
    #[arg(long)]
    column: Option<String>,
    /// Season of the first row minus one; leading rows are dropped so the
    /// fitted series starts at season 1.
    #[arg(long)]
    offset: Option<usize>,
    #[arg(long)]
    period: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long, value_enum)]
    init: Option<InitArg>,
    #[arg(long)]
    n_starts: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    grad_tol: Option<f64>,
}

#[derive(Debug, Args)]
struct LyapunovArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelFlags,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    z: Option<f64>,
    /// Skip the fractional-moment search.
    #[arg(long)]
    no_delta_search: bool,
    #[arg(long)]
    n0_max: Option<usize>,
    #[arg(long)]
    mc_size: Option<usize>,
}

#[derive(Debug, Args)]
struct StationarityArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelFlags,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    z: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Consistency,
    Normality,
    Both,
}

#[derive(Debug, Args)]
struct MonteCarloArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelFlags,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Comma-separated, strictly increasing years per replication.
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    /// Years per replication for the normality experiment.
    #[arg(long)]
    n_years: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, value_enum)]
    init: Option<InitArg>,
    #[arg(long)]
    n_starts: Option<usize>,
}

/// Configuration document. Every field is optional; flags win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub model: Option<ModelConfig>,
    pub sim: Option<SimSection>,
    pub data: Option<DataSection>,
    pub fit: Option<FitSection>,
    pub lyapunov: Option<LyapunovSection>,
    pub mc: Option<McSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub period: Option<usize>,
    pub p: Option<usize>,
    pub q: Option<usize>,
    pub omega: Option<Vec<f64>>,
    pub alpha: Option<Coefficients>,
    pub beta: Option<Coefficients>,
    pub dist: Option<InnovationDist>,
}

/// Lag coefficients, either per season (`[[a11, a12], [a21, a22]]`) or
/// flattened season-major.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Coefficients {
    Flat(Vec<f64>),
    Nested(Vec<Vec<f64>>),
}

impl Coefficients {
    fn flatten(self) -> Vec<f64> {
        match self {
            Self::Flat(v) => v,
            Self::Nested(v) => v.into_iter().flatten().collect(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub n_years: Option<usize>,
    pub burn_in_years: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub path: Option<PathBuf>,
    pub column: Option<String>,
    pub offset: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub init: Option<InitScheme>,
    pub n_starts: Option<usize>,
    pub max_iters: Option<usize>,
    pub grad_tol: Option<f64>,
    pub margin: Option<f64>,
    pub enforce_beta_radius: Option<bool>,
    pub allow_pinv: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovSection {
    pub blocks: Option<usize>,
    pub z: Option<f64>,
    pub delta_search: Option<bool>,
    pub n0_max: Option<usize>,
    pub mc_size: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub mode: Option<Mode>,
    pub n_grid: Option<Vec<usize>>,
    pub n_years: Option<usize>,
    pub reps: Option<usize>,
}

fn load_config(path: Option<&Path>) -> CliResult<RunConfig> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text =
        fs::read_to_string(path).map_err(|e| CliError::usage(format!("--config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::usage(format!("--config {}: {e}", path.display())))
}

fn parse_dist(s: &str) -> CliResult<InnovationDist> {
    let lower = s.trim().to_ascii_lowercase();
    match lower.as_str() {
        "gaussian" | "normal" => Ok(InnovationDist::StandardGaussian),
        "unit" => Ok(InnovationDist::UnitConstant),
        _ => {
            let dof =
                lower.strip_prefix("student-t:").and_then(|d| d.parse::<f64>().ok()).ok_or_else(|| {
                    CliError::usage(format!("--dist: expected gaussian, unit or student-t:<dof>, got '{s}'"))
                })?;
            InnovationDist::student_t(dof).map_err(|e| CliError::usage(format!("--dist: {e}")))
        }
    }
}

fn required<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::usage(format!("missing --{flag} (or the matching config key)")))
}

/// Builds the model from config values overridden by flags.
fn resolve_model(cfg: &RunConfig, flags: &ModelFlags) -> CliResult<(PGarchSpec, InnovationDist)> {
    let m = cfg.model.as_ref();
    let period = required(flags.period.or(m.and_then(|m| m.period)), "period")?;
    let p = required(flags.p.or(m.and_then(|m| m.p)), "p")?;
    let q = required(flags.q.or(m.and_then(|m| m.q)), "q")?;
    let omega = required(flags.omega.clone().or(m.and_then(|m| m.omega.clone())), "omega")?;
    let flat = |flag: &Option<Vec<f64>>, conf: Option<&Coefficients>, order: usize, name: &str| {
        let v = flag.clone().or_else(|| conf.cloned().map(Coefficients::flatten)).unwrap_or_default();
        if v.len() != period * order {
            return Err(CliError::usage(format!(
                "--{name}: expected {} values (period {period} x order {order}), got {}",
                period * order,
                v.len()
            )));
        }
        Ok(v.chunks(order.max(1)).map(|c| c.to_vec()).collect::<Vec<_>>())
    };
    let alpha = flat(&flags.alpha, m.and_then(|m| m.alpha.as_ref()), q, "alpha")?;
    let beta = flat(&flags.beta, m.and_then(|m| m.beta.as_ref()), p, "beta")?;
    let alpha = if q == 0 { vec![Vec::new(); period] } else { alpha };
    let beta = if p == 0 { vec![Vec::new(); period] } else { beta };
    if omega.len() != period {
        return Err(CliError::usage(format!("--omega: expected {period} values, got {}", omega.len())));
    }
    let spec = PGarchSpec::new(period, q, p, omega, alpha, beta)?;
    let dist = match &flags.dist {
        Some(s) => parse_dist(s)?,
        None => m.and_then(|m| m.dist).unwrap_or(InnovationDist::StandardGaussian),
    };
    dist.check()?;
    Ok((spec, dist))
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => {
            fs::write(p, text).map_err(|e| CliError::data(format!("cannot write {}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("outputs are serializable");
    s.push('\n');
    s
}

fn out_path<'a>(common: &'a Common, cfg: &'a RunConfig) -> Option<&'a Path> {
    common.out.as_deref().or(cfg.out.as_deref())
}

fn seed_of(common: &Common, cfg: &RunConfig) -> u64 {
    common.seed.or(cfg.seed).unwrap_or(0)
}

fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    let cfg = load_config(args.common.config.as_deref())?;
    let (spec, dist) = resolve_model(&cfg, &args.model)?;
    let sim = cfg.sim.as_ref();
    let n_years = required(args.n_years.or(sim.and_then(|s| s.n_years)), "n-years")?;
    let burn = args.burn_in_years.or(sim.and_then(|s| s.burn_in_years)).unwrap_or(DEFAULT_BURN_IN_YEARS);
    let sim_cfg = SimConfig { n_years, burn_in: burn * spec.period, seed: seed_of(&args.common, &cfg), dist };
    let series = simulate_path(&spec, &sim_cfg)?;
    let h = series.h_true.as_ref().expect("simulated series carries h");
    let mut text = String::with_capacity(series.len() * 64);
    text.push_str("t,season,y,h\n");
    for (i, (y, h)) in series.values.iter().zip(h).enumerate() {
        let t = i + 1;
        writeln!(text, "{t},{},{y:.16e},{h:.16e}", series.season(t)).unwrap();
    }
    write_output(out_path(&args.common, &cfg), &text)
}

/// Reads one numeric column from a CSV file with a header row.
pub fn read_csv_column(path: &Path, column: Option<&str>) -> std::result::Result<Vec<f64>, String> {
    let name = path.display();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| format!("{name}: {e}"))?;
    let headers = reader.headers().map_err(|e| format!("{name}: {e}"))?.clone();
    let index = match column {
        Some(c) => {
            headers.iter().position(|h| h == c).ok_or_else(|| format!("{name}: no column named '{c}'"))?
        }
        None if headers.len() == 1 => 0,
        None => headers
            .iter()
            .position(|h| h == "y")
            .ok_or_else(|| format!("{name}: several columns and none named 'y'; use --column"))?,
    };
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| format!("{name}: {e}"))?;
        let line = record.position().map_or(0, |p| p.line());
        let field =
            record.get(index).ok_or_else(|| format!("{name}:{line}: missing column {}", index + 1))?;
        let v: f64 =
            field.parse().map_err(|_| format!("{name}:{line}: cannot parse '{field}' as a number"))?;
        if !v.is_finite() {
            return Err(format!("{name}:{line}: value is not finite"));
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(format!("{name}: no data rows"));
    }
    Ok(values)
}

fn init_of(arg: Option<InitArg>, conf: Option<InitScheme>) -> InitScheme {
    match arg {
        Some(InitArg::Omega) => InitScheme::OmegaInit,
        Some(InitArg::Sample) => InitScheme::SampleInit,
        None => conf.unwrap_or_default(),
    }
}

fn fit_options(cfg: &RunConfig, init: Option<InitArg>, n_starts: Option<usize>, seed: u64) -> FitOptions {
    let f = cfg.fit.as_ref();
    let d = FitOptions::default();
    FitOptions {
        init: init_of(init, f.and_then(|f| f.init)),
        space: None,
        n_starts: n_starts.or(f.and_then(|f| f.n_starts)).unwrap_or(d.n_starts),
        max_iters: f.and_then(|f| f.max_iters).unwrap_or(d.max_iters),
        grad_tol: f.and_then(|f| f.grad_tol).unwrap_or(d.grad_tol),
        enforce_beta_radius: f.and_then(|f| f.enforce_beta_radius).unwrap_or(d.enforce_beta_radius),
        margin: f.and_then(|f| f.margin).unwrap_or(d.margin),
        seed,
        allow_pinv: f.and_then(|f| f.allow_pinv).unwrap_or(d.allow_pinv),
    }
}

fn cmd_fit(args: &FitArgs) -> CliResult<()> {
    let cfg = load_config(args.common.config.as_deref())?;
    let m = cfg.model.as_ref();
    let period = required(args.period.or(m.and_then(|m| m.period)), "period")?;
    let p = required(args.p.or(m.and_then(|m| m.p)), "p")?;
    let q = required(args.q.or(m.and_then(|m| m.q)), "q")?;
    if period == 0 {
        return Err(CliError::usage("--period must be >= 1"));
    }
    let mut opts = fit_options(&cfg, args.init, args.n_starts, seed_of(&args.common, &cfg));
    if let Some(n) = args.max_iters {
        opts.max_iters = n;
    }
    if let Some(t) = args.grad_tol {
        opts.grad_tol = t;
    }
    opts.check()?;

    let data = cfg.data.as_ref();
    let path = required(args.data.clone().or(data.and_then(|d| d.path.clone())), "data")?;
    let column = args.column.clone().or(data.and_then(|d| d.column.clone()));
    let offset = args.offset.or(data.and_then(|d| d.offset)).unwrap_or(0);
    if offset >= period {
        return Err(CliError::usage(format!("--offset must be < period {period}")));
    }
    let mut values = read_csv_column(&path, column.as_deref()).map_err(CliError::data)?;
    let skip = (period - offset) % period;
    if skip >= values.len() {
        return Err(CliError::data(format!("{}: too few rows for --offset {offset}", path.display())));
    }
    values.drain(..skip);
    let series = Series::new(values, 1)?;
    let result = fit(&series, period, q, p, &opts)?;
    write_output(out_path(&args.common, &cfg), &to_json(&result))
}

#[derive(Debug, Serialize)]
struct LyapunovOutput {
    estimate: LyapunovEstimate,
    beta_spectral_radius: f64,
    delta_search: Option<DeltaSearchResult>,
}

fn cmd_lyapunov(args: &LyapunovArgs) -> CliResult<()> {
    let cfg = load_config(args.common.config.as_deref())?;
    let (spec, dist) = resolve_model(&cfg, &args.model)?;
    let l = cfg.lyapunov.as_ref();
    let blocks = args.blocks.or(l.and_then(|l| l.blocks)).unwrap_or(100_000);
    let z = args.z.or(l.and_then(|l| l.z)).unwrap_or(DEFAULT_Z);
    let search = !args.no_delta_search && l.and_then(|l| l.delta_search).unwrap_or(true);
    let n0_max = args.n0_max.or(l.and_then(|l| l.n0_max)).unwrap_or(DEFAULT_N0_MAX);
    let mc_size = args.mc_size.or(l.and_then(|l| l.mc_size)).unwrap_or(20_000);
    let seed = seed_of(&args.common, &cfg);
    let estimate = lyapunov_mc_with_z(&spec, dist, blocks, seed, z)?;
    let delta_search = if search && dist != InnovationDist::UnitConstant {
        moment_delta_search(&spec, dist, n0_max, mc_size, seed)?
    } else {
        None
    };
    let out = LyapunovOutput { estimate, beta_spectral_radius: beta_spectral_radius(&spec), delta_search };
    write_output(out_path(&args.common, &cfg), &to_json(&out))
}

fn cmd_stationarity(args: &StationarityArgs) -> CliResult<()> {
    let cfg = load_config(args.common.config.as_deref())?;
    let (spec, dist) = resolve_model(&cfg, &args.model)?;
    let l = cfg.lyapunov.as_ref();
    let blocks = args.blocks.or(l.and_then(|l| l.blocks)).unwrap_or(100_000);
    let z = args.z.or(l.and_then(|l| l.z)).unwrap_or(DEFAULT_Z);
    let report = stationarity_report(&spec, dist, blocks, seed_of(&args.common, &cfg), z)?;
    let mut summary = format!("decision: {:?}", report.decision);
    if let Some(est) = &report.lyapunov {
        write!(summary, " (gamma_hat = {:.6}, se = {:.2e})", est.gamma_hat, est.std_error).unwrap();
    }
    write!(summary, "; rho(prod beta) = {:.6}", report.beta_spectral_radius).unwrap();
    eprintln!("{summary}");
    write_output(out_path(&args.common, &cfg), &to_json(&report))
}

fn cmd_montecarlo(args: &MonteCarloArgs) -> CliResult<()> {
    let cfg = load_config(args.common.config.as_deref())?;
    let (spec, dist) = resolve_model(&cfg, &args.model)?;
    let mc = cfg.mc.as_ref();
    let seed = seed_of(&args.common, &cfg);
    let opts = fit_options(&cfg, args.init, args.n_starts, seed);
    opts.check()?;
    let mode = args.mode.or(mc.and_then(|m| m.mode)).unwrap_or(Mode::Both);
    let reps = required(args.reps.or(mc.and_then(|m| m.reps)), "reps")?;
    let grid = args.n_grid.clone().or(mc.and_then(|m| m.n_grid.clone()));
    let n_years = args.n_years.or(mc.and_then(|m| m.n_years));
    let report: MonteCarloReport = match mode {
        Mode::Consistency => run_consistency(&spec, dist, &required(grid, "n-grid")?, reps, &opts, seed)?,
        Mode::Normality => run_normality(&spec, dist, required(n_years, "n-years")?, reps, &opts, seed)?,
        Mode::Both => {
            let grid = required(grid, "n-grid")?;
            let n = required(n_years, "n-years")?;
            let mut c = run_consistency(&spec, dist, &grid, reps, &opts, seed)?;
            let nrm = run_normality(&spec, dist, n, reps, &opts, seed)?;
            c.normality = nrm.normality;
            c.j_cross_block_mass = nrm.j_cross_block_mass;
            for w in nrm.warnings {
                if !c.warnings.contains(&w) {
                    c.warnings.push(w);
                }
            }
            c
        }
    };
    write_output(out_path(&args.common, &cfg), &to_json(&report))
}

fn run(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Lyapunov(a) => cmd_lyapunov(a),
        Command::Stationarity(a) => cmd_stationarity(a),
        Command::Montecarlo(a) => cmd_montecarlo(a),
    }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn dispatch(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.threads {
        Some(0) => Err(CliError::usage("--threads must be >= 1")),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(cli)),
            Err(e) => Err(CliError::usage(format!("--threads: {e}"))),
        },
        None => run(cli),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dist_flag() {
        assert_eq!(parse_dist("gaussian").unwrap(), InnovationDist::StandardGaussian);
        assert_eq!(parse_dist("student-t:6").unwrap(), InnovationDist::StandardizedStudentT { dof: 6.0 });
        assert_eq!(parse_dist("student-t:1").unwrap_err().code, EXIT_USAGE);
        assert_eq!(parse_dist("cauchy").unwrap_err().code, EXIT_USAGE);
    }

    #[test]
    fn config_nested_and_flat_coefficients() {
        let cfg: RunConfig = toml::from_str(
            "seed = 3\n[model]\nperiod = 2\np = 1\nq = 1\nomega = [0.5, 1.0]\nalpha = [[0.2], [0.3]]\nbeta = [0.3, 0.3]\n",
        )
        .unwrap();
        let (spec, dist) = resolve_model(&cfg, &ModelFlags::default()).unwrap();
        assert_eq!(spec, PGarchSpec::garch11(&[0.5, 1.0], &[0.2, 0.3], &[0.3, 0.3]).unwrap());
        assert_eq!(dist, InnovationDist::StandardGaussian);
    }

    #[test]
    fn flags_override_config() {
        let cfg: RunConfig =
            toml::from_str("[model]\nperiod = 1\np = 0\nq = 1\nomega = [1.0]\nalpha = [0.2]\n").unwrap();
        let flags = ModelFlags { alpha: Some(vec![0.4]), ..Default::default() };
        let (spec, _) = resolve_model(&cfg, &flags).unwrap();
        assert_eq!(spec.alpha, vec![vec![0.4]]);
    }

    #[test]
    fn unknown_config_key_is_usage_error() {
        assert!(toml::from_str::<RunConfig>("[model]\nperiods = 2\n").is_err());
    }

    #[test]
    fn wrong_coefficient_count() {
        let flags = ModelFlags {
            period: Some(2),
            p: Some(1),
            q: Some(1),
            omega: Some(vec![1.0, 1.0]),
            alpha: Some(vec![0.1]),
            beta: Some(vec![0.1, 0.1]),
            dist: None,
        };
        let e = resolve_model(&RunConfig::default(), &flags).unwrap_err();
        assert_eq!(e.code, EXIT_USAGE);
        assert!(e.message.contains("--alpha"));
    }
}
