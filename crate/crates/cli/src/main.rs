//! `steer`: operators, ensembles, sweeps, oracles, map search and fits.

mod artifacts;
mod commands;
mod config;
mod rational;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;
use crate::rational::PiMultiple;

/// Worker-count override for every parallel stage.
pub const THREADS_ENV: &str = "STEER_THREADS";

#[derive(Parser)]
#[command(name = "steer", version, about = "Measurement-steered preparation of spin-1 chain ground states")]
struct Cli {
    /// Base directory for run directories.
    #[arg(long, global = true, default_value = "runs")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build, validate and export a mapping set; print its commutation measure.
    Operators(OperatorsArgs),
    /// Run one trajectory ensemble.
    Run(RunArgs),
    /// Run ensembles over a grid of one parameter.
    Sweep(SweepArgs),
    /// Compare the engine against the dense reference oracles.
    Oracle(OracleArgs),
    /// Search mapping sets minimizing the commutation measure.
    Optimize(OptimizeArgs),
    /// Gap and entropy fits.
    Fit(FitArgs),
}

/// Configuration file plus per-key overrides shared by `run` and `sweep`.
#[derive(Args, Clone, Default)]
pub struct Overrides {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "Ls")]
    ls: Option<usize>,
    /// Reset interval in units of π (`0.5pi`, `1/2pi`, `pi/4`, `0.25`).
    #[arg(long)]
    dt: Option<PiMultiple>,
    #[arg(long)]
    periods: Option<usize>,
    /// Dephasing rate ε.
    #[arg(long)]
    eps: Option<f64>,
    /// Noise slice in units of π, or `auto`.
    #[arg(long)]
    slice: Option<String>,
    /// Stop-scheme window in periods, or `off`.
    #[arg(long)]
    twait: Option<String>,
    #[arg(long)]
    traj: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// M1, M2 or M3.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Mapping set in the operator text format.
    #[arg(long)]
    operators: Option<PathBuf>,
    /// up, zero, alternating, random-product:SEED, random:SEED.
    #[arg(long)]
    initial: Option<String>,
    /// Engine propagation tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Arbitrary `key=value` configuration override (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Overrides {
    pub fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| anyhow::anyhow!("--set expects KEY=VALUE, got '{kv}'"))?;
            cfg.set(k.trim(), v)?;
        }
        if let Some(v) = self.ls {
            cfg.ls = v;
        }
        if let Some(v) = self.dt {
            cfg.dt = v;
        }
        if let Some(v) = self.periods {
            cfg.periods = v;
        }
        if let Some(v) = self.eps {
            cfg.eps = v;
        }
        if let Some(v) = &self.slice {
            cfg.set("noise.slice", v)?;
        }
        if let Some(v) = &self.twait {
            cfg.set("stop.twait_periods", v)?;
        }
        if let Some(v) = self.traj {
            cfg.traj = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.kind {
            cfg.kind = v.clone();
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = &self.operators {
            cfg.operators_file = Some(v.clone());
        }
        if let Some(v) = &self.initial {
            cfg.set("protocol.initial", v)?;
        }
        if let Some(v) = self.tol {
            cfg.tol = v;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
pub struct OperatorsArgs {
    #[arg(long, default_value = "M1")]
    kind: String,
    #[arg(long, default_value_t = 0.404)]
    alpha: f64,
    /// Read the set from a file instead of a built-in kind.
    #[arg(long)]
    custom: Option<PathBuf>,
    /// Accept a custom set that violates the Hamiltonian-sum constraint.
    #[arg(long)]
    waive_sum: bool,
    /// Print the per-term commutation report.
    #[arg(long)]
    report: bool,
    /// Write the set in the operator text format.
    #[arg(long)]
    export: Option<PathBuf>,
    /// frobenius-squared, frobenius or spectral.
    #[arg(long, default_value = "frobenius-squared")]
    norm: String,
}

#[derive(Args)]
pub struct RunArgs {
    #[command(flatten)]
    overrides: Overrides,
    /// Enable the stop scheme (window 4 unless --twait is given).
    #[arg(long)]
    stop_scheme: bool,
    /// Also write the final state of trajectory 0.
    #[arg(long)]
    snapshot: bool,
    /// Skip the half-chain entanglement entropy.
    #[arg(long)]
    no_entropy: bool,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SweepParam {
    Dt,
    Eps,
    #[value(name = "Ls")]
    Ls,
    Alpha,
}

#[derive(Args)]
pub struct SweepArgs {
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long, value_enum)]
    param: SweepParam,
    /// `a:b:n`, `log:a:b:n` (real parameters) or a comma-separated list.
    #[arg(long)]
    values: String,
    #[arg(long)]
    stop_scheme: bool,
    #[arg(long)]
    no_entropy: bool,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum OracleMode {
    Channel,
    LindbladLimit,
    Dephasing,
    Toy,
}

#[derive(Args)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    mode: OracleMode,
    #[arg(long = "Ls")]
    ls: Option<usize>,
    /// Reset interval; for lindblad-limit the smallest interval of the ladder.
    #[arg(long)]
    dt: Option<PiMultiple>,
    /// Explicit interval ladder for lindblad-limit.
    #[arg(long)]
    dts: Option<String>,
    #[arg(long)]
    periods: Option<usize>,
    #[arg(long, default_value_t = 512)]
    traj: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "M1")]
    kind: String,
    #[arg(long, default_value_t = 0.404)]
    alpha: f64,
    #[arg(long, default_value_t = 1e-2)]
    eps: f64,
    /// Tolerance in standard errors for the ensemble comparisons.
    #[arg(long, default_value_t = 3.0)]
    sigma: f64,
    /// Rescaled-time horizon for lindblad-limit.
    #[arg(long, default_value_t = 3.0)]
    horizon: f64,
    /// RK4 step of the dephasing master equation.
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Qubit pairs of the commuting toy model.
    #[arg(long, default_value_t = 2)]
    n: usize,
}

#[derive(Args)]
pub struct OptimizeArgs {
    #[arg(long, default_value_t = 64)]
    starts: usize,
    /// Drop the Hamiltonian-sum constraint (trace normalization kept).
    #[arg(long)]
    unconstrained: bool,
    /// Separate sets on even and odd bonds.
    #[arg(long)]
    even_odd: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "frobenius-squared")]
    norm: String,
    #[arg(long, default_value_t = 3000)]
    max_iter: usize,
}

#[derive(Args)]
pub struct FitArgs {
    #[command(subcommand)]
    target: FitTarget,
}

#[derive(Subcommand)]
pub enum FitTarget {
    /// Gap from the energy decay rate over a ladder of reset intervals.
    Gap(GapArgs),
    /// Saturated entanglement entropy from a truncated Schmidt spectrum.
    Entropy(EntropyArgs),
}

#[derive(Args)]
pub struct GapArgs {
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long, default_value = "0.1pi:0.5pi:5")]
    dts: String,
    /// Largest interval in the linear region.
    #[arg(long, default_value = "0.5pi")]
    max_dt: PiMultiple,
}

#[derive(Args)]
pub struct EntropyArgs {
    /// Schmidt values (whitespace, comma or newline separated).
    #[arg(long, conflicts_with = "snapshot")]
    spectrum: Option<PathBuf>,
    /// State snapshot; the spectrum is taken across `--bond`.
    #[arg(long)]
    snapshot: Option<PathBuf>,
    /// Bond index (default: central).
    #[arg(long)]
    bond: Option<usize>,
    /// Largest truncation (default: all values, at most 40).
    #[arg(long)]
    cut_max: Option<usize>,
    /// Smaller truncation of the validity check (default cut_max/2).
    #[arg(long)]
    cut_small: Option<usize>,
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("{THREADS_ENV} must be a positive integer, got '{v}'"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    let outcome = match &cli.command {
        Command::Operators(a) => commands::operators(a),
        Command::Run(a) => commands::run(&cli.out, a),
        Command::Sweep(a) => commands::sweep(&cli.out, a),
        Command::Oracle(a) => commands::oracle(&cli.out, a),
        Command::Optimize(a) => commands::optimize(&cli.out, a),
        Command::Fit(a) => commands::fit(&cli.out, a),
    };
    match outcome {
        Ok(checks) if checks.all_passed() => ExitCode::SUCCESS,
        Ok(checks) => {
            eprintln!("invariant check failed: {}", checks.failed().join(", "));
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
