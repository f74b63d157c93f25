//! `ia-sim` command line.
//!
//! Exit codes: 0 on success, 2 on invalid input (bad flags, malformed or
//! inconsistent scenario files), 1 on runtime failures such as I/O errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::alignment::{beamformer_json, build_system, feasibility, solve_beamformers, DEFAULT_TOL_AMP, DEFAULT_TOL_PHASE};
use crate::channel::{channel_at, Scenario, ScenarioConfig, SubcarrierPair};
use crate::los::{los_feasible, spacing_analysis};
use crate::scheme::SchemeRegistry;
use crate::sim::{dfmin_distribution, run_sweep, SweepConfig};
use crate::{Error, Result};

/// Environment variable capping the sweep worker count.
pub const THREADS_ENV: &str = "IA_SIM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "ia-sim", version, about = "Interference alignment over two OFDM subcarriers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo sum-rate sweep over the normalized subcarrier spacing.
    Sweep(SweepArgs),
    /// Distribution of the minimal feasible spacing over sampled scenarios.
    DfminDist(DfminArgs),
    /// Solve zero-forcing beamformers for a scenario at one spacing.
    Solve(SpacingArgs),
    /// Alignment feasibility residuals for a scenario at one spacing.
    Feasibility(SpacingArgs),
    /// Minimal feasible spacing of a three-user scenario.
    Spacing(ScenarioArg),
    /// Sum rates of registered schemes for a scenario at one spacing.
    Rate(RateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Direct-link distance range in meters, `low,high`.
    #[arg(long, value_parser = parse_range, default_value = "150,250")]
    direct_range: [f64; 2],
    /// Cross-link distance range in meters, `low,high`.
    #[arg(long, value_parser = parse_range, default_value = "250,350")]
    cross_range: [f64; 2],
    /// Path-loss exponent.
    #[arg(long, default_value_t = 3.76)]
    gamma: f64,
    /// Wave propagation speed in m/s.
    #[arg(long, default_value_t = 3.0e8)]
    wave_speed: f64,
}

impl ModelArgs {
    fn config(&self) -> ScenarioConfig {
        ScenarioConfig {
            k: 3,
            direct_distance_range: self.direct_range,
            cross_distance_range: self.cross_range,
            path_loss_exponent: self.gamma,
            wave_speed: self.wave_speed,
        }
    }
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    snr_db: f64,
    /// Largest spacing in units of Δf_min.
    #[arg(long, default_value_t = 10.0)]
    x_max: f64,
    #[arg(long, default_value_t = 201)]
    x_points: usize,
    #[arg(long, default_value_t = 20)]
    grid_per_dfmin: usize,
    /// Frequency of the first subcarrier in Hz.
    #[arg(long, default_value_t = 0.0)]
    base_freq: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Debug, Args)]
struct DfminArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Debug, Args)]
struct ScenarioArg {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
}

#[derive(Debug, Args)]
struct SpacingArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Subcarrier spacing in Hz.
    #[arg(long)]
    delta_f: f64,
    #[arg(long, default_value_t = 0.0)]
    base_freq: f64,
    #[arg(long, default_value_t = DEFAULT_TOL_AMP)]
    tol_amp: f64,
    #[arg(long, default_value_t = DEFAULT_TOL_PHASE)]
    tol_phase: f64,
}

#[derive(Debug, Args)]
struct RateArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    delta_f: f64,
    #[arg(long, default_value_t = 0.0)]
    base_freq: f64,
    /// Scheme to evaluate; repeat for several. All registered schemes when absent.
    #[arg(long = "scheme")]
    schemes: Vec<String>,
}

fn parse_range(s: &str) -> std::result::Result<[f64; 2], String> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `low,high`, got `{s}`"))?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok([p(lo)?, p(hi)?])
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_owned(),
            source,
        }),
        None => out.write_all(text.as_bytes()).map_err(|source| Error::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::invalid(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

fn spacing_pair(base: f64, delta_f: f64) -> Result<SubcarrierPair> {
    if !(delta_f > 0.0 && delta_f.is_finite()) {
        return Err(Error::invalid(format!("--delta-f must be > 0, got {delta_f}")));
    }
    SubcarrierPair::with_spacing(base, delta_f)
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Sweep(a) => {
            let cfg = SweepConfig {
                scenario: a.model.config(),
                snr_db: a.snr_db,
                trials: a.trials,
                x_max: a.x_max,
                x_points: a.x_points,
                grid_per_dfmin: a.grid_per_dfmin,
                master_seed: a.seed,
                base_frequency: a.base_freq,
                threads: threads_from_env()?,
            };
            let res = run_sweep(&cfg)?;
            res.check_invariants()
                .map_err(|e| Error::invalid(format!("sweep invariant violated: {e}")))?;
            let text = match a.format {
                Format::Csv => res.to_csv(),
                Format::Json => res.to_json() + "\n",
            };
            emit(out, a.output.as_deref(), &text)
        }
        Command::DfminDist(a) => {
            let summary = dfmin_distribution(&a.model.config(), a.trials, a.seed)?;
            emit(out, a.output.as_deref(), &json_line(&summary))
        }
        Command::Solve(a) => {
            let scn = Scenario::load(&a.scenario)?;
            let ch = channel_at(&scn, spacing_pair(a.base_freq, a.delta_f)?);
            let sys = build_system(&ch)?;
            let report = feasibility(&sys, a.tol_amp, a.tol_phase);
            let bf = solve_beamformers(&sys);
            emit(out, None, &(beamformer_json(&ch, &bf, &report) + "\n"))
        }
        Command::Feasibility(a) => {
            let scn = Scenario::load(&a.scenario)?;
            let ch = channel_at(&scn, spacing_pair(a.base_freq, a.delta_f)?);
            let report = feasibility(&build_system(&ch)?, a.tol_amp, a.tol_phase);
            emit(out, None, &json_line(&report))
        }
        Command::Spacing(a) => {
            let scn = Scenario::load(&a.scenario)?;
            let sa = spacing_analysis(&scn)?;
            #[derive(Serialize)]
            struct Doc {
                delta_tau_sum: f64,
                delta_f_min: Option<f64>,
                degenerate: bool,
                feasible_at_delta_f_min: bool,
            }
            let feasible = !sa.degenerate && los_feasible(&scn, sa.delta_f_min, 1e-9)?.feasible;
            let doc = Doc {
                delta_tau_sum: sa.delta_tau_sum,
                delta_f_min: (!sa.degenerate).then_some(sa.delta_f_min),
                degenerate: sa.degenerate,
                feasible_at_delta_f_min: feasible || sa.degenerate,
            };
            emit(out, None, &json_line(&doc))
        }
        Command::Rate(a) => {
            let scn = Scenario::load(&a.scenario)?;
            let ch = channel_at(&scn, spacing_pair(a.base_freq, a.delta_f)?);
            let registry = SchemeRegistry::with_builtin(scn.k())?;
            let names: Vec<String> = if a.schemes.is_empty() {
                registry.names().into_iter().map(String::from).collect()
            } else {
                a.schemes
            };
            let reports = names
                .iter()
                .map(|n| registry.require(n)?.evaluate(&ch, scn.noise_variance))
                .collect::<Result<Vec<_>>>()?;
            emit(out, None, &json_line(&reports))
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(rendered.as_bytes());
            } else {
                let _ = err.write_all(rendered.as_bytes());
            }
            return if code == 0 { 0 } else { 2 };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_invalid_input() {
                2
            } else {
                1
            }
        }
    }
}
