//! `vqclab` command-line runner: gradient checks, Q-learning training and
//! quanvolution over CSV maps, all driven by a JSON config plus flags.

pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use vqclab_core::qrl::EnvKind;
use vqclab_core::vqc::PARAMETER_SHIFT;
use vqclab_core::{rng, MeasurementConfig};

use crate::commands::{RunRecord, GRAD_CHECK_FILE, RUN_FILE};
use crate::config::{ExperimentConfig, DEFAULT_OUT_DIR};
pub use crate::error::{CliError, CliResult};

/// Stream used to derive shot-sampling seeds from the run seed.
const SHOTS_STREAM: u64 = 0x5407;

#[derive(Debug, Parser)]
#[command(name = "vqclab", version, about = "Variational quantum circuit experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare parameter-shift gradients with finite differences.
    GradCheck(GradCheckArgs),
    /// Train a circuit Q-learning agent.
    TrainQrl(TrainArgs),
    /// Slide a random circuit filter over a CSV feature map.
    Quanv(QuanvArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON experiment config.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Run seed; a generated one is recorded in run.json when omitted.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MeasurementArgs {
    /// Estimate expectations from M shots.
    #[arg(long, value_name = "M", conflicts_with = "analytic")]
    pub shots: Option<u64>,
    /// Exact expectations.
    #[arg(long)]
    pub analytic: bool,
}

#[derive(Debug, Args)]
pub struct GradCheckArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Largest model width.
    #[arg(long, value_name = "U")]
    pub qubits: Option<usize>,
    /// Largest model depth.
    #[arg(long, value_name = "L")]
    pub depth: Option<usize>,
    #[arg(long, hide = true)]
    pub param_shift: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub measurement: MeasurementArgs,
    /// frozenlake or cartpole.
    #[arg(long)]
    pub env: Option<String>,
    /// Training episodes.
    #[arg(long, value_name = "N")]
    pub episodes: Option<usize>,
    /// Circuit width; must fit the environment's states and actions.
    #[arg(long, value_name = "U")]
    pub qubits: Option<usize>,
    /// Circuit layers.
    #[arg(long, value_name = "L")]
    pub depth: Option<usize>,
}

#[derive(Debug, Args)]
pub struct QuanvArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub measurement: MeasurementArgs,
    /// CSV feature map, one row per line.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// Filter width; must be a perfect square (kernel = √U).
    #[arg(long, value_name = "U")]
    pub qubits: Option<usize>,
    /// Layers in the filter circuit.
    #[arg(long, value_name = "L")]
    pub depth: Option<usize>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Messages go to stdout, errors to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            0
        }
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

/// Runs a parsed command and returns its summary lines.
pub fn execute(cli: Cli) -> CliResult<Vec<String>> {
    match cli.command {
        Command::GradCheck(args) => grad_check(args),
        Command::TrainQrl(args) => train_qrl(args),
        Command::Quanv(args) => quanv(args),
    }
}

struct Resolved {
    config: ExperimentConfig,
    seed: u64,
    generated: bool,
    out: PathBuf,
}

fn resolve(common: &CommonArgs) -> CliResult<Resolved> {
    let config = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let (seed, generated) = match common.seed.or(config.seed) {
        Some(seed) => (seed, false),
        None => (rand::random::<u32>() as u64, true),
    };
    let out = common.out.clone().or_else(|| config.out.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    std::fs::create_dir_all(&out)
        .map_err(|e| CliError::Runtime(format!("cannot create output directory {}: {e}", out.display())))?;
    Ok(Resolved { config, seed, generated, out })
}

fn seed_line(r: &Resolved) -> String {
    if r.generated {
        format!("seed {} (generated; pass --seed {} to replay)", r.seed, r.seed)
    } else {
        format!("seed {}", r.seed)
    }
}

fn measurement_override(args: &MeasurementArgs, seed: u64) -> Option<MeasurementConfig> {
    if args.analytic {
        Some(MeasurementConfig::Analytic)
    } else {
        args.shots.map(|shots| MeasurementConfig::Shots { shots, seed: rng::derive_seed(seed, SHOTS_STREAM) })
    }
}

/// Writes run.json; its `config` member is a complete config file that
/// replays the run.
fn record(r: &Resolved, command: &str, update: impl FnOnce(&mut ExperimentConfig)) -> CliResult<()> {
    let mut config = ExperimentConfig { seed: Some(r.seed), out: None, ..r.config.clone() };
    update(&mut config);
    commands::write_json(&r.out, RUN_FILE, &RunRecord { command, seed: r.seed, config: &config })
}

fn grad_check(args: GradCheckArgs) -> CliResult<Vec<String>> {
    let r = resolve(&args.common)?;
    let mut cfg = r.config.grad_check.clone();
    if let Some(q) = args.qubits {
        cfg.qubits = q;
    }
    if let Some(d) = args.depth {
        cfg.depth = d;
    }
    cfg.validate()?;
    record(&r, "grad-check", |c| c.grad_check = cfg.clone())?;
    let shift = args.param_shift.unwrap_or(PARAMETER_SHIFT);
    let report = commands::grad_check(&cfg, r.seed, shift)?;
    commands::write_json(&r.out, GRAD_CHECK_FILE, &report)?;
    let line = format!(
        "grad-check: max |parameter-shift - finite-difference| = {:.3e} over {} models (tolerance {:.0e})",
        report.max_abs_deviation, report.models, report.tolerance
    );
    if report.passed {
        Ok(vec![seed_line(&r), line])
    } else {
        println!("{}", seed_line(&r));
        Err(CliError::Validation(format!("{line}: gradient mismatch")))
    }
}

fn train_qrl(args: TrainArgs) -> CliResult<Vec<String>> {
    let r = resolve(&args.common)?;
    let mut cfg = r.config.train_qrl.clone();
    cfg.seed = r.seed;
    if let Some(env) = &args.env {
        cfg.env = env.parse::<EnvKind>()?;
    }
    if let Some(n) = args.episodes {
        cfg.episodes = n;
    }
    if let Some(q) = args.qubits {
        cfg.qubits = q;
    }
    if let Some(d) = args.depth {
        cfg.depth = d;
    }
    if let Some(m) = measurement_override(&args.measurement, r.seed) {
        cfg.measurement = m;
    }
    cfg.validate()?;
    cfg.init_agent()?;
    record(&r, "train-qrl", |c| c.train_qrl = cfg.clone())?;
    let summary = commands::train_qrl(&cfg, &r.out)?;
    let eval = summary.final_evaluation;
    Ok(vec![
        seed_line(&r),
        format!(
            "train-qrl {}: {} episodes; greedy evaluation over {} episodes: mean return {:.3}, success rate {:.3}",
            summary.env, summary.episodes_run, eval.episodes, eval.mean_return, eval.success_rate
        ),
        format!("outputs written to {}", r.out.display()),
    ])
}

fn quanv(args: QuanvArgs) -> CliResult<Vec<String>> {
    let r = resolve(&args.common)?;
    let mut cfg = r.config.quanv.clone();
    if let Some(u) = args.qubits {
        let k = (1..=u).find(|k| k * k >= u).unwrap_or(0);
        if k * k != u {
            return Err(CliError::Validation(format!("--qubits {u}: quanv needs a square qubit count (k×k patches)")));
        }
        cfg.kernel = k;
    }
    if let Some(d) = args.depth {
        cfg.depth = d;
    }
    if let Some(m) = measurement_override(&args.measurement, r.seed) {
        cfg.measurement = m;
    }
    cfg.validate()?;
    record(&r, "quanv", |c| c.quanv = cfg.clone())?;
    let (map, output) = commands::quanv(&cfg, r.seed, &args.input, &r.out)?;
    let [h, w, c] = output.shape();
    Ok(vec![
        seed_line(&r),
        format!("quanv: {}x{} input -> {h}x{w}x{c} output", map.height(), map.width()),
        format!("outputs written to {}", r.out.display()),
    ])
}
