//! Command-line front end: closed-form bounds, Monte Carlo sweeps, coverage
//! design queries, the ML experiment and the oracle checks, as CSV or JSON.

pub mod commands;
pub mod config;
pub mod table;
pub mod verify;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use satcrb::montecarlo::SweepAxis;
use satcrb::signal::SolveMode;
use satcrb::SignalModel;
use thiserror::Error;

use commands::CoverageQuery;
use config::{Format, RunConfig};

/// Caps the worker threads of the parallel commands.
pub const THREADS_ENV: &str = "SATCRB_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] satcrb::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("{failed} of {total} checks failed")]
    Verification { failed: usize, total: usize },
}

impl CliError {
    /// 2 for usage and configuration, 3 for degenerate or unachievable
    /// inputs, 4 for failed verification.
    pub fn exit_code(&self) -> i32 {
        use satcrb::Error as E;
        match self {
            Self::Config(_) | Self::Io(_) => 2,
            Self::Core(E::InvalidParams(_) | E::InvalidConfig(_) | E::MissingRssSplit) => 2,
            Self::Core(_) => 3,
            Self::Verification { .. } => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "satcrb", version, about = "Localization bounds for satellite TDOA receivers")]
pub struct Cli {
    /// key = value or JSON file; missing keys take the defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random stream; default 1.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// csv (default) or json.
    #[arg(long, global = true)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Limit, asymptotic and two-term bounds along h or φ_L,max.
    Bounds(BoundsArgs),
    /// N·CRB percentiles over random constellations against the limit.
    Montecarlo(MonteCarloArgs),
    /// Coverage probability, or the smallest angle or altitude reaching a target.
    Coverage(CoverageArgs),
    /// Maximum-likelihood MSE against the bound over an SNR grid.
    Ml(MlArgs),
    /// Cross-checks between independent computations; exit 4 on any failure.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// h (km) or phi_l_max (degrees).
    #[arg(long, default_value = "h")]
    pub axis: String,
    /// Explicit comma-separated axis values; overrides --from/--to/--points.
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<f64>,
    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long, default_value_t = 80)]
    pub points: usize,
    /// Geometric instead of linear spacing.
    #[arg(long)]
    pub log: bool,
    #[arg(long, default_value = "tdoa")]
    pub model: String,
}

#[derive(Debug, Args)]
pub struct MonteCarloArgs {
    #[arg(long, default_value = "tdoa")]
    pub model: String,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, value_delimiter = ',', default_value = "50,100,250,500,1000,2000")]
    pub n_list: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    /// prob, min_angle or min_height.
    #[arg(long, default_value = "prob")]
    pub query: CoverageQuery,
    #[arg(long, default_value_t = 0.9)]
    pub target: f64,
}

#[derive(Debug, Args)]
pub struct MlArgs {
    /// Es,max/N₀ values in dB.
    #[arg(long, value_delimiter = ',', default_value = "0,5,10,15,20,25,30,35,40")]
    pub snr: Vec<f64>,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// fix_z, full_3d or both.
    #[arg(long, default_value = "both")]
    pub mode: String,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Scale ηρ on one side of every comparison, to confirm failures are caught.
    #[arg(long)]
    pub perturb_eta_rho: Option<f64>,
}

pub fn parse_threads(raw: &str) -> Result<usize, CliError> {
    raw.trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n = parse_threads(&raw)?;
    // a pool that already exists (repeated calls in one process) is fine
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_path = Some(out.display().to_string());
    }
    if let Some(format) = cli.format {
        cfg.format = format;
    }
    Ok(cfg)
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.output_path {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn model(name: &str) -> Result<SignalModel, CliError> {
    Ok(name.parse::<SignalModel>()?)
}

/// Runs one invocation; the error carries the exit code.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    let cfg = load(cli)?;
    match &cli.command {
        Command::Bounds(a) => {
            let axis: SweepAxis = a.axis.parse()?;
            let values = if a.grid.is_empty() {
                let (lo, hi) = match axis {
                    SweepAxis::H => (500.0, 40000.0),
                    SweepAxis::PhiLMax => (5.0, 90.0),
                };
                commands::grid(a.from.unwrap_or(lo), a.to.unwrap_or(hi), a.points, a.log)?
            } else {
                a.grid.clone()
            };
            let t = commands::bounds(&cfg, axis, &values, model(&a.model)?)?;
            emit(&cfg, &t.render(cfg.format))
        }
        Command::Montecarlo(a) => {
            let t = commands::montecarlo(&cfg, model(&a.model)?, a.trials, &a.n_list)?;
            emit(&cfg, &t.render(cfg.format))
        }
        Command::Coverage(a) => emit(&cfg, &commands::coverage_report(&cfg, a.query, a.target)?),
        Command::Ml(a) => {
            let modes = match a.mode.as_str() {
                "both" => vec![SolveMode::FixZ, SolveMode::Full3d],
                other => vec![other.parse::<SolveMode>()?],
            };
            let t = commands::ml(&cfg, &a.snr, a.trials, &modes)?;
            emit(&cfg, &t.render(cfg.format))
        }
        Command::Verify(a) => {
            let checks = verify::run_checks(&cfg, a.perturb_eta_rho)?;
            let mut report: String = checks.iter().map(|c| format!("{c}\n")).collect();
            let failed = checks.iter().filter(|c| !c.passed()).count();
            report.push_str(&format!("{} of {} checks passed\n", checks.len() - failed, checks.len()));
            emit(&cfg, &report)?;
            if failed > 0 {
                return Err(CliError::Verification { failed, total: checks.len() });
            }
            Ok(())
        }
    }
}
