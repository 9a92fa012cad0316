//! `pairgen` command line: simulate, compare, sweep, design.
//!
//! Exit codes: 0 success, 2 invalid input, 3 integration failure, 4 a
//! quantum run disagreed with the closed forms beyond tolerance.

mod output;
mod sweep;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;

use crate::design::{design, lookup, platforms_from_json, DesignInputs, MaterialPlatform};
use crate::error::{DesignError, EngineError, ScenarioError};
use crate::scenarios::{run_config, ScenarioConfig, ScenarioOutput};

pub use output::{format_number, rows_csv, table_csv, table_json, to_json};
pub use sweep::{Axis, DesignSpec, PlatformRef, Spacing, SweepConfig, SweepTable, SweepTarget, MAX_AXIS_POINTS, SWEEP_SCHEMA};

pub const OUTPUT_SCHEMA: &str = "pairgen.output/1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Integration(String),
    #[error("{0}")]
    Tolerance(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 2,
            Self::Integration(_) => 3,
            Self::Tolerance(_) => 4,
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match &e {
            ScenarioError::Engine(EngineError::IntegrationFailure { .. } | EngineError::Accuracy { .. }) => {
                Self::Integration(e.to_string())
            }
            _ => Self::Validation(e.to_string()),
        }
    }
}

impl From<DesignError> for CliError {
    fn from(e: DesignError) -> Self {
        Self::Validation(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "pairgen", version, about = "Dissipatively filtered photon-pair source: simulation and design")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario config; compares against the closed forms if the config asks.
    Simulate(SimulateArgs),
    /// `simulate` with the comparison forced on.
    Compare(SimulateArgs),
    /// Evaluate a scenario or design over a 1-2 axis grid.
    Sweep(SweepArgs),
    /// Device design report for a material platform.
    Design(DesignArgs),
}

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, clap::Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; defaults to PAIRGEN_JOBS, then the number of CPUs.
    #[arg(long, env = "PAIRGEN_JOBS")]
    pub jobs: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, clap::Args)]
pub struct DesignArgs {
    /// Built-in platform name or path to a platform JSON file.
    #[arg(long)]
    pub platform: String,
    /// Pump power in W.
    #[arg(long)]
    pub power: f64,
    /// Target residual-pump to pair ratio.
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1e10)]
    pub pump_photons: f64,
    /// Kerr rate per photon in m^-1; derived from the power when omitted.
    #[arg(long)]
    pub u_spatial: Option<f64>,
    /// Pair survival factor; `exp(-2 gamma L_min)` when omitted.
    #[arg(long)]
    pub eta: Option<f64>,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))
}

fn simulation_json(cfg: &ScenarioConfig, out: &ScenarioOutput) -> serde_json::Value {
    json!({
        "schema": OUTPUT_SCHEMA,
        "kind": cfg.kind,
        "params": cfg.params,
        "columns": table_json(&out.table),
        "comparison": out.report,
        "stats": out.stats,
    })
}

fn tolerance_message(out: &ScenarioOutput) -> Option<String> {
    let r = out.report.as_ref()?;
    if r.pass {
        return None;
    }
    let failed: Vec<String> = r
        .deviations
        .iter()
        .filter(|d| !d.pass)
        .map(|d| format!("{} {:e} > {:e} at t = {}", d.observable, d.max_deviation, d.tolerance, d.at_time))
        .collect();
    let breach = if r.validity_breach {
        format!(" (lambda = {} is outside the weak-pump regime)", r.lambda)
    } else {
        String::new()
    };
    Some(format!("comparison failed: {}{breach}", failed.join("; ")))
}

pub fn cmd_simulate(args: &SimulateArgs, force_compare: bool) -> Result<String, CliError> {
    let mut cfg = ScenarioConfig::from_json(&read(&args.config)?)?;
    if force_compare {
        cfg.compare = true;
        cfg.validate()?;
    }
    let out = run_config(&cfg)?;
    let text = match args.format {
        Format::Csv => table_csv(&out.table),
        Format::Json => to_json(&simulation_json(&cfg, &out)),
    };
    write(&args.out, &text)?;
    if let Some(msg) = tolerance_message(&out) {
        return Err(CliError::Tolerance(msg));
    }
    let summary = match &out.report {
        Some(r) if r.validity_breach => format!(
            "{} samples written, comparison passed but lambda = {} is outside the weak-pump regime",
            out.table.times.len(),
            r.lambda
        ),
        Some(r) => format!("{} samples written, comparison passed at lambda = {}", out.table.times.len(), r.lambda),
        None => format!("{} samples written", out.table.times.len()),
    };
    Ok(summary)
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<String, CliError> {
    let cfg = SweepConfig::from_json(&read(&args.config)?)?;
    let jobs = args.jobs.unwrap_or_else(default_jobs);
    if jobs == 0 {
        return Err(CliError::Validation("--jobs must be >= 1".into()));
    }
    let table = cfg.run(jobs)?;
    let text = match args.format {
        Format::Csv => rows_csv(&table.header, &table.rows),
        Format::Json => to_json(&json!({
            "schema": OUTPUT_SCHEMA,
            "header": table.header,
            "rows": table.rows,
        })),
    };
    write(&args.out, &text)?;
    if table.comparison_failed {
        return Err(CliError::Tolerance("some sweep points failed their comparison (pass = 0)".into()));
    }
    Ok(format!("{} points written", table.rows.len()))
}

/// Resolves a built-in name, or a platform file holding exactly one platform.
pub fn resolve_platform(spec: &str) -> Result<MaterialPlatform<f64>, CliError> {
    let path = Path::new(spec);
    if !path.is_file() {
        return Ok(lookup(spec)?);
    }
    let mut all = platforms_from_json(&read(path)?)?;
    match all.len() {
        1 => Ok(all.remove(0)),
        n => Err(CliError::Validation(format!("{spec} holds {n} platforms; give a file with exactly one"))),
    }
}

pub fn cmd_design(args: &DesignArgs) -> Result<String, CliError> {
    let platform = resolve_platform(&args.platform)?;
    let inputs = DesignInputs {
        power: args.power,
        delta: args.delta,
        pump_photons: args.pump_photons,
        u_spatial: args.u_spatial,
        eta: args.eta,
    };
    let report = design(&platform, &inputs)?;
    let text = to_json(&json!({
        "schema": OUTPUT_SCHEMA,
        "platform": platform,
        "report": report,
    }));
    write(&args.out, &text)?;
    Ok(format!(
        "{}: Gamma = {} m^-1, L_min = {} m, R2 = {} s^-1",
        report.platform, report.big_gamma, report.l_min, report.pair_rate
    ))
}

pub fn execute(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a, false),
        Command::Compare(a) => cmd_simulate(a, true),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Design(a) => cmd_design(a),
    }
}

/// Parses `args` (program name first), runs, reports on stderr/stdout and returns the exit code.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(msg) => {
            println!("{msg}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
