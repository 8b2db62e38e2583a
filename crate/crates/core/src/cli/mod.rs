//! Command-line front end: `simulate`, `divisibility`, `measure`,
//! `classical` and `demo`.
//!
//! Every command writes its files into `--out` together with a
//! `report.json` manifest and prints that manifest to stdout.
//! Exit codes: 0 success, 1 I/O failure, 2 configuration or usage error,
//! 3 numerical failure.

pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::classical::{classical_rates, spectral_track};
use crate::divisibility::{divisibility_report, DivisibilityOptions, DEFAULT_BASES, DEFAULT_SAMPLES};
use crate::error::Error;
use crate::generator::TranslationDemoParams;
use crate::measure::{measure_local, measure_orthogonal_scan, EnclosingSurface, ScanOptions};
use crate::operator::DensityMatrix;
use crate::propagator::{integrate, PropagatorTable};
use crate::scenarios::{
    run_dilation_demo, run_eternal_demo, run_translation_demo, DemoOptions, DilationDemoParams, EternalDemoParams,
};

pub use config::{ConfigError, InitialState, ProcessConfig};
pub use output::RunReport;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "HELSTROM_FLOW_THREADS";

#[derive(Debug, Parser)]
#[command(name = "helstrom-flow", version, about = "Helstrom-matrix non-Markovianity toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// Process configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the seed of the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the time step of the configuration.
    #[arg(long)]
    pub dt_override: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Orthogonal,
    Local,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DemoName {
    Translation,
    Eternal,
    Dilation,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrates the master equation and tabulates ρ(t).
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Initial state: `mixed`, `basis:K` or a Bloch vector `x,y,z`.
        #[arg(long)]
        rho0: Option<String>,
    },
    /// Rate conditions and map-level witnesses for CP and P divisibility.
    Divisibility {
        #[command(flatten)]
        common: Common,
        /// Random bases for the sampled P rate condition.
        #[arg(long, default_value_t = DEFAULT_BASES)]
        bases: usize,
        /// Random operators for the contraction witness.
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Helstrom-matrix measure of non-Markovianity.
    Measure {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = MethodArg::Orthogonal)]
        method: MethodArg,
        /// Polar grid size n: n × 2n directions and ⌈5n/3⌉ weights.
        #[arg(long, default_value_t = 24)]
        grid: usize,
        /// Random restarts above dimension 2.
        #[arg(long)]
        restarts: Option<usize>,
        /// Skips the local refinement after the grid scan.
        #[arg(long)]
        no_refine: bool,
        /// Radius of the enclosing surface around the maximally mixed state.
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Eigenvalue trajectory and classical jump rates.
    Classical {
        #[command(flatten)]
        common: Common,
        /// Initial state: `mixed`, `basis:K` or a Bloch vector `x,y,z`.
        #[arg(long)]
        rho0: Option<String>,
    },
    /// Worked scenarios with their full reports.
    Demo {
        #[arg(value_enum)]
        name: DemoName,
        /// Scenario parameters (JSON); defaults are used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        dt_override: Option<f64>,
        #[arg(long, default_value_t = 24)]
        grid: usize,
    },
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Io(String),
    Config(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Numerical(_) | Error::DivisibilityUndefined { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    configure_threads();
    let echo: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli.command, echo) {
        Ok(report) => {
            let mut stdout = std::io::stdout().lock();
            let _ = writeln!(stdout, "{}", report.to_json());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Runs a parsed command and writes its outputs.
pub fn execute(command: &Command, echo: Vec<String>) -> CliResult<RunReport> {
    match command {
        Command::Simulate { common, rho0 } => simulate(common, rho0.as_deref(), echo),
        Command::Divisibility { common, bases, samples } => divisibility(common, *bases, *samples, echo),
        Command::Measure {
            common,
            method,
            grid,
            restarts,
            no_refine,
            radius,
        } => {
            let mut scan = ScanOptions::with_grid(*grid);
            scan.refine = !no_refine;
            if let Some(r) = restarts {
                scan.restarts = *r;
            }
            measure(common, *method, scan, *radius, echo)
        }
        Command::Classical { common, rho0 } => classical(common, rho0.as_deref(), echo),
        Command::Demo {
            name,
            config,
            out,
            seed,
            dt_override,
            grid,
        } => demo(*name, config.as_deref(), out, *seed, *dt_override, *grid, echo),
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

struct Loaded {
    config: ProcessConfig,
    table: PropagatorTable,
    report: RunReport,
}

fn load(common: &Common, command: &str, echo: Vec<String>) -> CliResult<Loaded> {
    let text = read_text(&common.config)?;
    let mut config =
        ProcessConfig::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", common.config.display())))?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(dt) = common.dt_override {
        config.time.dt = dt;
    }
    let config = config.explicit()?;
    let spec = config.spec()?;
    let table = integrate(&spec, config.time.t_final, config.time.dt)?;
    let report = RunReport::new(command, echo, &config.to_canonical_json(), config.seed, &common.out);
    Ok(Loaded { config, table, report })
}

fn initial_state(config: &ProcessConfig, flag: Option<&str>) -> CliResult<DensityMatrix> {
    match flag {
        Some(s) => Ok(InitialState::parse_flag(s)
            .and_then(|st| st.resolve(config.dim))
            .map_err(|e| CliError::Config(format!("--rho0: {e}")))?),
        None => Ok(config.initial_state()?),
    }
}

fn simulate(common: &Common, rho0: Option<&str>, echo: Vec<String>) -> CliResult<RunReport> {
    let Loaded { config, table, mut report } = load(common, "simulate", echo)?;
    let rho0 = initial_state(&config, rho0)?;
    let (header, rows) = output::state_rows(&table, &rho0);
    report.write_csv("trajectory.csv", &header, &rows)?;
    let last = rows.last().expect("nonempty grid");
    report.measures.insert("final_min_eigenvalue".into(), last[last.len() - 1]);
    report.finish()
}

fn divisibility(common: &Common, bases: usize, samples: usize, echo: Vec<String>) -> CliResult<RunReport> {
    let Loaded { config, table, mut report } = load(common, "divisibility", echo)?;
    let spec = config.spec()?;
    let options = DivisibilityOptions {
        n_bases: bases,
        n_samples: samples,
        seed: config.seed,
    };
    let div = divisibility_report(&spec, &table, &options);
    let n_intervals = table.len().saturating_sub(1);
    if n_intervals > 0 && div.undefined_intervals.len() == n_intervals {
        return Err(CliError::Numerical(
            "divisibility undefined on every interval: the dynamical maps are not invertible".into(),
        ));
    }
    report.write_json("divisibility.json", &div)?;
    report.verdicts.insert("cp".into(), div.verdict_cp);
    report.verdicts.insert("p".into(), div.verdict_p);
    report.verdicts.insert("witness_cp".into(), div.witness_verdict_cp);
    report.verdicts.insert("witness_p".into(), div.witness_verdict_p);
    report.verdicts.insert("concordant".into(), div.concordant);
    report.measures.insert("cp_worst_margin".into(), div.cp_rate_condition.worst_margin);
    report.measures.insert("p_worst_margin".into(), div.p_rate_condition.worst_margin);
    report.finish()
}

fn measure(
    common: &Common,
    method: MethodArg,
    mut scan: ScanOptions,
    radius: Option<f64>,
    echo: Vec<String>,
) -> CliResult<RunReport> {
    let Loaded { config, table, mut report } = load(common, "measure", echo)?;
    scan.seed = config.seed;
    let result = match method {
        MethodArg::Orthogonal => measure_orthogonal_scan(&table, &scan)?,
        MethodArg::Local => {
            let center = DensityMatrix::maximally_mixed(config.dim);
            let surface = match radius {
                Some(r) => EnclosingSurface::new(center, r)?,
                None => EnclosingSurface::around(center)?,
            };
            measure_local(&table, &surface, &scan)?
        }
    };
    report.write_json("measure.json", &result)?;
    let (header, rows) = output::trace_norm_rows(&result.trajectory);
    report.write_csv("optimal_trajectory.csv", &header, &rows)?;
    report.measures.insert("measure".into(), result.value);
    report.measures.insert("optimizer_weight_gap".into(), result.optimizer.weight_gap());
    report.verdicts.insert("lower_bound".into(), result.lower_bound);
    report.finish()
}

fn classical(common: &Common, rho0: Option<&str>, echo: Vec<String>) -> CliResult<RunReport> {
    let Loaded { config, table, mut report } = load(common, "classical", echo)?;
    let rho0 = initial_state(&config, rho0)?;
    let spec = config.spec()?;
    let traj = spectral_track(&table, &rho0)?;
    let process = classical_rates(&spec, &traj)?;
    let (header, rows) = output::probability_rows(&process);
    report.write_csv("probabilities.csv", &header, &rows)?;
    let (header, rows) = output::rate_rows(&process);
    report.write_csv("rates.csv", &header, &rows)?;
    report.write_json("classical.json", &output::ClassicalSummary::new(&process, &traj))?;
    report.measures.insert("min_offdiag_rate".into(), process.min_offdiag);
    report.verdicts.insert("nonnegative_rates".into(), process.min_offdiag >= -1e-9);
    report.verdicts.insert("degenerate_spectrum".into(), traj.any_degenerate());
    report.finish()
}

fn parse_params<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = read_text(path)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| CliError::Config(format!("{}: {}: {}", path.display(), e.path(), e.inner())))
}

fn demo(
    name: DemoName,
    config: Option<&Path>,
    out: &Path,
    seed: Option<u64>,
    dt_override: Option<f64>,
    grid: usize,
    echo: Vec<String>,
) -> CliResult<RunReport> {
    let seed = seed.unwrap_or(0);
    let mut options = DemoOptions {
        scan: ScanOptions { seed, ..ScanOptions::with_grid(grid) },
        ..Default::default()
    };
    options.divisibility.seed = seed;
    if let Some(dt) = dt_override {
        options.dt = dt;
    }
    match name {
        DemoName::Translation => {
            let params: TranslationDemoParams = match config {
                Some(p) => parse_params(p)?,
                None => TranslationDemoParams::from_geometry(0.5, 0.3),
            };
            let mut report = RunReport::new("demo translation", echo, &output::canonical(&params), seed, out);
            let result = run_translation_demo(&params, 0.3, &options)?;
            report.write_json("translation.json", &result)?;
            let (header, rows) = output::trace_norm_rows(&result.optimal_trajectory);
            report.write_csv("optimal_trajectory.csv", &header, &rows)?;
            report.measures.insert("measure_numeric".into(), result.measure_numeric);
            report.measures.insert("measure_analytic".into(), result.measure_analytic);
            report.measures.insert("measure_local".into(), result.measure_local);
            report.verdicts.insert("cp".into(), result.verdict_cp);
            report.verdicts.insert("p".into(), result.verdict_p);
            report.verdicts.insert("max_mixed_in_image".into(), result.image_contains_max_mixed);
            report.finish()
        }
        DemoName::Eternal => {
            let params: EternalDemoParams = match config {
                Some(p) => parse_params(p)?,
                None => EternalDemoParams::default(),
            };
            let mut report = RunReport::new("demo eternal", echo, &output::canonical(&params), seed, out);
            let result = run_eternal_demo(&params, &options)?;
            report.write_json("eternal.json", &result)?;
            report.verdicts.insert("cp".into(), result.cp_verdict);
            report.verdicts.insert("p".into(), result.p_verdict);
            report.measures.insert("measure_orthogonal".into(), result.measure_orthogonal);
            report.measures.insert("measure_local".into(), result.measure_local);
            report.finish()
        }
        DemoName::Dilation => {
            let mut params: DilationDemoParams = match config {
                Some(p) => parse_params(p)?,
                None => DilationDemoParams::default(),
            };
            if let Some(dt) = dt_override {
                params.dt = dt;
            }
            let mut report = RunReport::new("demo dilation", echo, &output::canonical(&params), seed, out);
            let result = run_dilation_demo(&params)?;
            let rows: Vec<Vec<f64>> = (0..result.times.len())
                .map(|k| vec![result.times[k], result.i_int[k], result.i_ext[k], result.sum[k]])
                .collect();
            report.write_csv("information_flow.csv", &["t", "i_int", "i_ext", "sum"].map(String::from), &rows)?;
            report.write_json("dilation.json", &result)?;
            report.measures.insert("max_residual".into(), result.max_residual);
            report.measures.insert("i_ext_initial".into(), result.i_ext_initial);
            report.verdicts.insert("conserved".into(), result.max_residual <= 1e-8);
            report.finish()
        }
    }
}

/// Verdict and measure maps are ordered so reports diff cleanly.
pub type Named<T> = BTreeMap<String, T>;
