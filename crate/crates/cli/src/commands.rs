//! The three experiment commands. Each one writes only under its output
//! directory and is a pure function of its resolved config and seed.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use rand::Rng;
use serde::Serialize;

use vqclab_core::qrl::{run_training_with, AgentCheckpoint, EvalPoint, EvalResult, MetricsWriter, QrlConfig};
use vqclab_core::quanv::{quanv_forward_measured, FeatureMap2D, QuanvFilter, QuanvOutput};
use vqclab_core::vqc::{finite_diff_grad, parameter_shift_grad_with_shift};
use vqclab_core::{rng, EncodingSpec, Entangler, Input, VqcModel};

use crate::config::{GradCheckConfig, QuanvConfig};
use crate::error::{CliError, CliResult};

pub const RUN_FILE: &str = "run.json";
pub const GRAD_CHECK_FILE: &str = "grad_check.json";
pub const METRICS_FILE: &str = "metrics.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const QUANV_FILE: &str = "quanv.json";

/// Records what ran and with which seed, so any run can be replayed.
#[derive(Debug, Serialize)]
pub struct RunRecord<'a, C: Serialize> {
    pub command: &'a str,
    pub seed: u64,
    pub config: &'a C,
}

pub fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(format!("serialize {name}: {e}")))?;
    write_text(dir, name, &text)
}

fn write_text(dir: &Path, name: &str, text: &str) -> CliResult<()> {
    fs::write(dir.join(name), format!("{text}\n"))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub models: usize,
    pub max_abs_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares the two-point shift rule (with the given shift) against
/// central differences on `config.models` random models.
pub fn grad_check(config: &GradCheckConfig, seed: u64, shift: f64) -> CliResult<GradCheckReport> {
    config.validate()?;
    let mut rng = rng::seeded(seed);
    let mut worst = 0.0f64;
    for _ in 0..config.models {
        let u = rng.random_range(1..=config.qubits);
        let depth = rng.random_range(1..=config.depth);
        let entangler = if rng.random::<bool>() { Entangler::Ring } else { Entangler::Chain };
        let model = VqcModel::random_in(u, depth, entangler, EncodingSpec::default(), std::f64::consts::PI, &mut rng)?;
        let x: Vec<f64> = (0..u).map(|_| rng.random_range(-2.0..2.0)).collect();
        let upstream: Vec<f64> = (0..u).map(|_| rng.random_range(-1.0..1.0)).collect();
        let shifted = parameter_shift_grad_with_shift(&model, Input::Features(&x), &upstream, shift)?;
        let fd = finite_diff_grad(&model, Input::Features(&x), &upstream, config.h)?;
        let dev = shifted.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(dev);
    }
    Ok(GradCheckReport {
        models: config.models,
        max_abs_deviation: worst,
        tolerance: config.tolerance,
        passed: worst <= config.tolerance,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainSummary {
    pub env: String,
    pub episodes_run: usize,
    pub final_evaluation: EvalResult,
    pub evaluations: Vec<EvalPoint>,
}

/// Trains, streaming one metrics row per episode, then writes the agent
/// checkpoint and a greedy evaluation summary.
pub fn train_qrl(config: &QrlConfig, out: &Path) -> CliResult<TrainSummary> {
    config.validate()?;
    let file = File::create(out.join(METRICS_FILE))?;
    let mut metrics = MetricsWriter::new(BufWriter::new(file))?;
    let report = run_training_with(config, |row| metrics.write(row))?;
    drop(metrics);

    write_text(out, CHECKPOINT_FILE, &AgentCheckpoint::new(&report.agent, config.seed).to_json())?;
    let summary = TrainSummary {
        env: config.env.to_string(),
        episodes_run: report.episodes.len(),
        final_evaluation: config.evaluate_agent(&report.agent)?,
        evaluations: report.evaluations,
    };
    write_json(out, SUMMARY_FILE, &summary)?;
    Ok(summary)
}

/// Builds the seeded random filter and applies it to the CSV map at `input`.
pub fn quanv(config: &QuanvConfig, seed: u64, input: &Path, out: &Path) -> CliResult<(FeatureMap2D, QuanvOutput)> {
    config.validate()?;
    let text = fs::read_to_string(input)
        .map_err(|e| CliError::Validation(format!("cannot read input map {}: {e}", input.display())))?;
    let map = FeatureMap2D::from_csv_str(&text)?;
    let filter =
        QuanvFilter::random(config.kernel, config.stride, config.depth, config.input_min, config.input_max, seed)?;
    let output = quanv_forward_measured(&filter, &map, &config.measurement)?;
    write_text(out, QUANV_FILE, &output.to_json())?;
    Ok((map, output))
}
