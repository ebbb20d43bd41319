//! `atomnet` command line: `budget`, `capture` and `teleport`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 a pair search
//! exhausted its trial limit, 3 I/O failure.

pub mod scenario;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::atomics::BellOutcome;
use crate::capture_sim::{self, CampaignConfig};
use crate::csvfmt;
use crate::error::Error;
use crate::linkmath::{self, LinkBudget};
use crate::rng;
use crate::teleport::{self, TeleportRecord};

pub use scenario::{Scenario, Sweep, SweepParameter, TeleportInputs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Exhausted(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Exhausted(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Exhausted { .. } => CliError::Exhausted(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(
    name = "atomnet",
    version,
    about = "Entanglement capture and atomic teleportation simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form link budget, optionally swept over one parameter.
    Budget(CommonArgs),
    /// Monte-Carlo capture campaign.
    Capture(CommonArgs),
    /// State-vector teleportation runs.
    Teleport(CommonArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// Scenario file (TOML); the built-in scenario is used otherwise.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Maximum capture trials per pair.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Number of pairs to capture.
    #[arg(long)]
    pub pairs: Option<u64>,
    /// Number of random teleportation runs.
    #[arg(long)]
    pub runs: Option<u64>,
    /// name:start:stop:steps
    #[arg(long)]
    pub sweep: Option<String>,
    /// Also write every capture trial to `<out>.trials.csv`.
    #[arg(long)]
    pub per_trial_csv: bool,
    /// Print the effective scenario and exit.
    #[arg(long)]
    pub print_config: bool,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub loss_db: Option<f64>,
    #[arg(long)]
    pub p_miss: Option<f64>,
    #[arg(long)]
    pub n_cycles: Option<u32>,
}

impl CommonArgs {
    /// Loads the scenario file (or the built-in one) and applies flag overrides.
    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let mut s = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
                Scenario::from_toml(&text).map_err(CliError::Config)?
            }
            None => Scenario::builtin(),
        };
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(out) = &self.out {
            s.output_path = Some(out.clone());
        }
        if let Some(t) = self.trials {
            s.capture.max_trials_per_pair = Some(t);
        }
        if let Some(p) = self.pairs {
            s.capture.target_pairs = p;
        }
        if let Some(r) = self.runs {
            s.teleport_inputs = TeleportInputs::Random(r);
        }
        if let Some(sw) = &self.sweep {
            s.sweep = Some(sw.parse().map_err(CliError::Usage)?);
        }
        if self.per_trial_csv {
            s.capture.per_trial_csv = true;
        }
        if let Some(w) = self.workers {
            s.capture.workers = w;
        }
        if let Some(l) = self.loss_db {
            s.budget.loss_db = l;
        }
        s.set_detector(self.p_miss, self.n_cycles);
        s.validate().map_err(CliError::Config)?;
        Ok(s)
    }
}

type Runner = fn(&Scenario, &mut dyn Write) -> Result<(), CliError>;

/// Parses `args` (including the program name) and runs the command,
/// writing the summary to `stdout`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            write!(stdout, "{e}").map_err(|e| CliError::Io(e.to_string()))?;
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    let (args, runner): (&CommonArgs, Runner) = match &cli.command {
        Command::Budget(a) => (a, cmd_budget),
        Command::Capture(a) => (a, cmd_capture),
        Command::Teleport(a) => (a, cmd_teleport),
    };
    let scenario = args.scenario()?;
    if args.print_config {
        return write_out(stdout, &scenario.to_toml());
    }
    runner(&scenario, stdout)
}

fn write_out(stdout: &mut dyn Write, text: &str) -> Result<(), CliError> {
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| CliError::Io(e.to_string()))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn summary(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

pub const BUDGET_CSV_HEADER: &str = "loss_db,p_miss,n_cycles,eta_joint,eta_single,t_fluor,lambda,epsilon,snr_db,expected_trials,pair_time_s,herald_fidelity";

/// One budget row for `budget`.
pub fn budget_row(budget: &LinkBudget) -> Result<String, CliError> {
    budget.validate()?;
    let f = csvfmt::float;
    let lambda = linkmath::survival_prob(budget.loss_db)?;
    let eps = linkmath::false_positive_prob(budget.p_miss, budget.n_cycles)?;
    let snr = match linkmath::snr_db(eps)?.db() {
        Some(s) => f(s),
        None => "unbounded".to_string(),
    };
    let fidelity = linkmath::herald_fidelity(lambda, budget.eta_joint, budget.eta_single, eps)?;
    Ok(format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        f(budget.loss_db),
        f(budget.p_miss),
        budget.n_cycles,
        f(budget.eta_joint),
        f(budget.eta_single),
        f(budget.t_fluor),
        f(lambda),
        f(eps),
        snr,
        f(linkmath::expected_trials(budget.loss_db)),
        f(linkmath::pair_generation_time(budget)),
        f(fidelity),
    ))
}

/// Link-budget table, one row per sweep point.
pub fn budget_table(scenario: &Scenario) -> Result<String, CliError> {
    let base = scenario.budget();
    let budgets = match &scenario.sweep {
        None => vec![base],
        Some(sweep) => {
            let points = sweep.points().map_err(CliError::Config)?;
            points
                .into_iter()
                .map(|v| sweep.parameter.set(&base, v))
                .collect()
        }
    };
    let mut csv = format!("{BUDGET_CSV_HEADER}\n");
    for b in &budgets {
        csv.push_str(&budget_row(b)?);
        csv.push('\n');
    }
    Ok(csv)
}

pub fn cmd_budget(scenario: &Scenario, stdout: &mut dyn Write) -> Result<(), CliError> {
    let csv = budget_table(scenario)?;
    match &scenario.output_path {
        Some(path) => {
            write_file(path, &csv)?;
            let rows = csv.lines().count() - 1;
            write_out(
                stdout,
                &summary(&[
                    ("rows", rows.to_string()),
                    ("output", path.display().to_string()),
                ]),
            )
        }
        None => write_out(stdout, &csv),
    }
}

fn trials_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.trials.csv"))
}

pub fn cmd_capture(scenario: &Scenario, stdout: &mut dyn Write) -> Result<(), CliError> {
    if scenario.sweep.is_some() {
        return Err(CliError::Usage(
            "--sweep is only supported by `budget`".into(),
        ));
    }
    if scenario.capture.per_trial_csv && scenario.output_path.is_none() {
        return Err(CliError::Usage("per-trial CSV needs --out".into()));
    }
    let budget = scenario.budget();
    let config = CampaignConfig {
        target_pairs: scenario.capture.target_pairs,
        master_seed: scenario.seed,
        workers: scenario.capture.workers,
        max_trials_per_pair: scenario.capture.max_trials_per_pair.unwrap_or(u64::MAX),
        record_trials: scenario.capture.per_trial_csv,
    };
    let out = capture_sim::run_campaign_with(&budget, &config)?;

    if let Some(path) = &scenario.output_path {
        let mut csv = format!("{}\n", capture_sim::PAIRS_CSV_HEADER);
        for p in &out.pairs {
            csv.push_str(&p.csv_row());
            csv.push('\n');
        }
        write_file(path, &csv)?;
        if config.record_trials {
            let mut csv = format!("{}\n", capture_sim::TRIALS_CSV_HEADER);
            for t in &out.trials {
                csv.push_str(&t.csv_row());
                csv.push('\n');
            }
            write_file(&trials_path(path), &csv)?;
        }
    }

    let mut lines: Vec<(&str, String)> = vec![("seed", scenario.seed.to_string())];
    lines.extend(out.stats.summary_lines());
    lines.push((
        "analytic_herald_fidelity",
        csvfmt::float(budget.herald_fidelity()?),
    ));
    lines.push((
        "analytic_mean_trials_per_pair",
        csvfmt::float(budget.mean_trials_per_pair()),
    ));
    lines.push((
        "analytic_pair_time_loss_only",
        csvfmt::float(linkmath::pair_generation_time(&budget)),
    ));
    write_out(stdout, &summary(&lines))
}

/// Haar-random qubit amplitudes.
fn random_input<R: Rng>(rng: &mut R) -> (Complex64, Complex64) {
    let weight: f64 = rng.random();
    let phase_a = rng.random::<f64>() * std::f64::consts::TAU;
    let phase_b = rng.random::<f64>() * std::f64::consts::TAU;
    (
        Complex64::from_polar(weight.sqrt(), phase_a),
        Complex64::from_polar((1.0 - weight).sqrt(), phase_b),
    )
}

/// Runs every teleportation of the scenario; run `i` uses its own stream.
pub fn teleport_runs(scenario: &Scenario) -> Result<Vec<(u64, TeleportRecord)>, CliError> {
    let det = scenario.detector().map_err(CliError::Config)?;
    let frame = scenario.frame();
    let inputs = &scenario.teleport_inputs;
    if inputs.is_empty() {
        return Err(CliError::Config("teleport_inputs is empty".into()));
    }
    (0..inputs.len())
        .into_par_iter()
        .map(|i| {
            let seed = rng::derive_seed(scenario.seed, i);
            let mut stream = rng::stream(seed);
            let (alpha0, beta0) = match inputs {
                TeleportInputs::Random(_) => random_input(&mut stream),
                TeleportInputs::Explicit(v) => v[i as usize].amplitudes(),
            };
            let record = teleport::teleport_once(alpha0, beta0, &frame, &det, &mut stream)?;
            Ok((seed, record))
        })
        .collect()
}

fn matrix_lines(prefix: &str, m: &[[f64; 4]; 4]) -> Vec<(String, String)> {
    BellOutcome::ALL
        .iter()
        .map(|o| {
            let row: Vec<String> = m[o.index()].iter().map(|&v| csvfmt::float(v)).collect();
            (format!("{prefix}[{o}]"), row.join(","))
        })
        .collect()
}

pub fn cmd_teleport(scenario: &Scenario, stdout: &mut dyn Write) -> Result<(), CliError> {
    if scenario.sweep.is_some() {
        return Err(CliError::Usage(
            "--sweep is only supported by `budget`".into(),
        ));
    }
    let runs = teleport_runs(scenario)?;
    if let Some(path) = &scenario.output_path {
        let mut csv = format!("{}\n", teleport::CSV_HEADER);
        for (seed, rec) in &runs {
            csv.push_str(&rec.csv_row(*seed));
            csv.push('\n');
        }
        write_file(path, &csv)?;
    }

    let n = runs.len() as f64;
    let mean_fidelity = runs.iter().map(|(_, r)| r.fidelity).sum::<f64>() / n;
    let min_fidelity = runs
        .iter()
        .map(|(_, r)| r.fidelity)
        .fold(f64::INFINITY, f64::min);
    let mut reported = [0u64; 4];
    let mut counts = [[0u64; 4]; 4];
    for (_, r) in &runs {
        reported[r.reported_outcome.index()] += 1;
        counts[r.outcome.index()][r.reported_outcome.index()] += 1;
    }

    let mut lines: Vec<(String, String)> = vec![
        ("seed".into(), scenario.seed.to_string()),
        ("runs".into(), runs.len().to_string()),
        ("mean_fidelity".into(), format!("{mean_fidelity:.12}")),
        ("min_fidelity".into(), format!("{min_fidelity:.12}")),
    ];
    for o in BellOutcome::ALL {
        lines.push((format!("reported[{o}]"), reported[o.index()].to_string()));
    }
    let det = scenario.detector().map_err(CliError::Config)?;
    if det.p_miss() > 0.0 {
        let empirical = counts.map(|row| {
            let total: u64 = row.iter().sum();
            row.map(|c| {
                if total > 0 {
                    c as f64 / total as f64
                } else {
                    0.0
                }
            })
        });
        lines.extend(matrix_lines("confusion_empirical", &empirical));
        lines.extend(matrix_lines(
            "confusion_analytic",
            &teleport::confusion_matrix(&det),
        ));
    }
    let text: String = lines.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
    write_out(stdout, &text)
}
