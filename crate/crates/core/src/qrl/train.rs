use std::io::Write;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::agent::{q_values, q_values_measured, select_action, train_step, QrlAgent};
use super::env::{Env, EnvKind, Observation};
use super::replay::{ReplayBuffer, Transition};
use crate::error::{Error, Result};
use crate::optim::{LossKind, Optimizer, OptimizerSpec};
use crate::rng;
use crate::vqc::{EncodingSpec, Entangler, MeasurementConfig, VqcModel, INIT_HALF_WIDTH};

/// Everything that determines a training run, seed included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QrlConfig {
    pub env: EnvKind,
    pub episodes: usize,
    pub qubits: usize,
    pub depth: usize,
    /// `None` picks [`Entangler::default_for`] the qubit count.
    pub entangler: Option<Entangler>,
    pub encoding: EncodingSpec,
    pub gamma: f64,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    /// Transitions collected before the first train step.
    pub warmup: usize,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Multiplicative epsilon decay applied after every episode.
    pub epsilon_decay: f64,
    pub target_sync_interval: u64,
    pub loss: LossKind,
    pub optimizer: OptimizerSpec,
    pub action_scale_init: f64,
    /// Initial circuit angles are drawn uniformly from (-w, w).
    pub init_half_width: f64,
    /// Readout used when acting; training gradients are always analytic.
    pub measurement: MeasurementConfig,
    /// Overrides the environment's episode step cap.
    pub step_cap: Option<usize>,
    /// Greedy evaluation every this many episodes (0 disables).
    pub eval_every: usize,
    pub eval_episodes: usize,
    /// Stop once a periodic evaluation reaches this success rate.
    pub stop_at_success: Option<f64>,
    /// Fill `wall_ms` in the metrics; leaves the run's output
    /// non-reproducible byte for byte.
    pub record_wall_clock: bool,
    /// Supplied by the caller, not read from config files.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for QrlConfig {
    fn default() -> Self {
        Self {
            env: EnvKind::FrozenLake4x4,
            episodes: 500,
            qubits: 4,
            depth: 2,
            entangler: None,
            encoding: EncodingSpec::default(),
            gamma: 0.99,
            buffer_capacity: 10_000,
            batch_size: 32,
            warmup: 100,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay: 0.995,
            target_sync_interval: 50,
            loss: LossKind::Mse,
            optimizer: OptimizerSpec::default(),
            action_scale_init: 1.0,
            init_half_width: INIT_HALF_WIDTH,
            measurement: MeasurementConfig::Analytic,
            step_cap: None,
            eval_every: 0,
            eval_episodes: 100,
            stop_at_success: None,
            record_wall_clock: false,
            seed: 0,
        }
    }
}

impl QrlConfig {
    pub fn for_env(env: EnvKind) -> Self {
        Self { env, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, why: String| Err(Error::usage(format!("qrl.{field}: {why}")));
        if self.qubits == 0 {
            return bad("qubits", "must be positive".into());
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma", format!("must lie in [0, 1), got {}", self.gamma));
        }
        if self.batch_size == 0 {
            return bad("batch_size", "must be positive".into());
        }
        if self.buffer_capacity < self.batch_size {
            return bad("buffer_capacity", "must be at least batch_size".into());
        }
        for (name, value) in [
            ("epsilon_start", self.epsilon_start),
            ("epsilon_end", self.epsilon_end),
            ("epsilon_decay", self.epsilon_decay),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return bad(name, format!("must lie in [0, 1], got {value}"));
            }
        }
        if self.target_sync_interval == 0 {
            return bad("target_sync_interval", "must be positive".into());
        }
        let lr = self.optimizer.lr();
        if !(lr.is_finite() && lr >= 0.0) {
            return bad("optimizer.lr", format!("must be finite and non-negative, got {lr}"));
        }
        if self.eval_every > 0 && self.eval_episodes == 0 {
            return bad("eval_episodes", "must be positive when eval_every is set".into());
        }
        if !(self.init_half_width.is_finite() && self.init_half_width >= 0.0) {
            return bad("init_half_width", format!("must be finite and non-negative, got {}", self.init_half_width));
        }
        self.loss.validate()?;
        self.measurement.validate()?;
        Ok(())
    }

    pub fn make_env(&self) -> Env {
        let env = Env::new(self.env);
        match self.step_cap {
            Some(cap) => env.with_step_cap(cap),
            None => env,
        }
    }

    /// Fresh agent with the initial parameters this config's seed implies.
    pub fn init_agent(&self) -> Result<QrlAgent> {
        self.validate()?;
        let entangler = self.entangler.unwrap_or(Entangler::default_for(self.qubits));
        let model = VqcModel::random_in(
            self.qubits,
            self.depth,
            entangler,
            self.encoding,
            self.init_half_width,
            &mut rng::child(self.seed, streams::INIT),
        )?;
        QrlAgent::new(self.env.spec(), model, self.gamma, self.target_sync_interval, self.action_scale_init)
    }

    /// Greedy evaluation over `eval_episodes`, always starting from the
    /// same evaluation stream of this config's seed.
    pub fn evaluate_agent(&self, agent: &QrlAgent) -> Result<EvalResult> {
        evaluate(agent, &self.make_env(), self.eval_episodes, &mut rng::child(self.seed, streams::EVAL))
    }

    /// Uniform-random baseline under the same reset stream as
    /// [`QrlConfig::evaluate_agent`].
    pub fn evaluate_random_baseline(&self) -> Result<EvalResult> {
        evaluate_random(
            &self.make_env(),
            self.eval_episodes,
            &mut rng::child(self.seed, streams::EVAL),
            &mut rng::child(self.seed, streams::BASELINE),
        )
    }
}

mod streams {
    pub const INIT: u64 = 1;
    pub const RESET: u64 = 2;
    pub const ACT: u64 = 3;
    pub const REPLAY: u64 = 4;
    pub const EVAL: u64 = 5;
    pub const SHOTS: u64 = 6;
    pub const BASELINE: u64 = 7;
}

/// One metrics row per episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeMetrics {
    pub episode: usize,
    pub steps: usize,
    pub ret: f64,
    /// Mean train-step loss over the episode; `None` before warm-up ends.
    pub mean_loss: Option<f64>,
    /// Exploration rate used during the episode.
    pub epsilon: f64,
    pub wall_ms: u64,
}

pub const METRICS_HEADER: &str = "episode,steps,return,mean_loss,epsilon,wall_ms";

impl EpisodeMetrics {
    pub fn csv_row(&self) -> String {
        let loss = self.mean_loss.map(|l| l.to_string()).unwrap_or_default();
        format!("{},{},{},{},{},{}", self.episode, self.steps, self.ret, loss, self.epsilon, self.wall_ms)
    }
}

/// Writes the metrics CSV one complete, flushed line at a time so an
/// interrupted run leaves a valid prefix.
pub struct MetricsWriter<W: Write> {
    out: W,
}

impl<W: Write> MetricsWriter<W> {
    pub fn new(mut out: W) -> Result<Self> {
        out.write_all(format!("{METRICS_HEADER}\n").as_bytes())?;
        out.flush()?;
        Ok(Self { out })
    }

    pub fn write(&mut self, row: &EpisodeMetrics) -> Result<()> {
        self.out.write_all(format!("{}\n", row.csv_row()).as_bytes())?;
        self.out.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub episodes: usize,
    pub mean_return: f64,
    pub success_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    /// Training episodes completed before this evaluation.
    pub after_episodes: usize,
    pub result: EvalResult,
}

#[derive(Debug, Clone)]
pub struct TrainingReport {
    pub agent: QrlAgent,
    pub episodes: Vec<EpisodeMetrics>,
    pub evaluations: Vec<EvalPoint>,
}

impl TrainingReport {
    pub fn best_success_rate(&self) -> Option<f64> {
        self.evaluations.iter().map(|e| e.result.success_rate).reduce(f64::max)
    }
}

pub fn run_training(config: &QrlConfig) -> Result<TrainingReport> {
    run_training_with(config, |_| Ok(()))
}

/// Runs ε-greedy Q-learning, invoking `on_episode` after every episode.
pub fn run_training_with(
    config: &QrlConfig,
    mut on_episode: impl FnMut(&EpisodeMetrics) -> Result<()>,
) -> Result<TrainingReport> {
    config.validate()?;
    let mut agent = config.init_agent()?;
    let mut optimizer = Optimizer::from_spec(&config.optimizer, agent.num_trainable());
    let mut buffer = ReplayBuffer::new(config.buffer_capacity, rng::derive_seed(config.seed, streams::REPLAY))?;
    let mut env = config.make_env();
    let mut reset_rng = rng::child(config.seed, streams::RESET);
    let mut act_rng = rng::child(config.seed, streams::ACT);
    let ready_at = config.warmup.max(config.batch_size);

    let mut epsilon = config.epsilon_start;
    let mut episodes = Vec::with_capacity(config.episodes);
    let mut evaluations = Vec::new();
    let mut global_step: u64 = 0;

    for episode in 0..config.episodes {
        let started = Instant::now();
        let mut obs = env.reset(&mut reset_rng);
        let mut ret = 0.0;
        let mut losses = Vec::new();
        while !env.is_done() {
            let measurement = match config.measurement {
                MeasurementConfig::Shots { shots, seed } => MeasurementConfig::Shots {
                    shots,
                    seed: rng::derive_seed(rng::derive_seed(seed, streams::SHOTS), global_step),
                },
                analytic => analytic,
            };
            let q = q_values_measured(&agent, &obs, &measurement)?;
            let action = select_action(&q, epsilon, &mut act_rng);
            let step = env.step(action)?;
            ret += step.reward;
            buffer.push(Transition {
                state: obs,
                action,
                reward: step.reward,
                next_state: step.observation.clone(),
                terminal: step.terminal,
            })?;
            global_step += 1;
            if buffer.len() >= ready_at {
                if let Some(loss) = train_step(&mut agent, &mut buffer, config.batch_size, config.loss, &mut optimizer)?
                {
                    losses.push(loss);
                }
            }
            obs = step.observation;
        }
        let row = EpisodeMetrics {
            episode,
            steps: env.steps(),
            ret,
            mean_loss: (!losses.is_empty()).then(|| losses.iter().sum::<f64>() / losses.len() as f64),
            epsilon,
            wall_ms: if config.record_wall_clock { started.elapsed().as_millis() as u64 } else { 0 },
        };
        on_episode(&row)?;
        episodes.push(row);
        epsilon = (epsilon * config.epsilon_decay).max(config.epsilon_end);

        if config.eval_every > 0 && (episode + 1) % config.eval_every == 0 {
            let result = config.evaluate_agent(&agent)?;
            evaluations.push(EvalPoint { after_episodes: episode + 1, result });
            if config.stop_at_success.is_some_and(|target| result.success_rate >= target) {
                break;
            }
        }
    }
    Ok(TrainingReport { agent, episodes, evaluations })
}

/// Rolls out `episodes` episodes of `policy` from copies of `env`, drawing
/// resets from `rng`. Success is reaching the goal (FrozenLake) or
/// surviving to the step cap (CartPole).
pub fn evaluate_policy<R, P>(env: &Env, episodes: usize, rng: &mut R, mut policy: P) -> Result<EvalResult>
where
    R: Rng + ?Sized,
    P: FnMut(&Observation) -> Result<usize>,
{
    if episodes == 0 {
        return Err(Error::usage("evaluation needs at least one episode"));
    }
    let mut total = 0.0;
    let mut successes = 0usize;
    for _ in 0..episodes {
        let mut env = env.clone();
        let mut obs = env.reset(rng);
        while !env.is_done() {
            let step = env.step(policy(&obs)?)?;
            total += step.reward;
            obs = step.observation;
        }
        let cap = env.spec().step_cap;
        let success = match env.spec().kind {
            EnvKind::FrozenLake4x4 => env.at_goal(),
            EnvKind::CartPole => cap > 0 && env.steps() >= cap,
        };
        successes += success as usize;
    }
    Ok(EvalResult { episodes, mean_return: total / episodes as f64, success_rate: successes as f64 / episodes as f64 })
}

/// Greedy (ε = 0) evaluation with analytic readout.
pub fn evaluate<R: Rng + ?Sized>(agent: &QrlAgent, env: &Env, episodes: usize, rng: &mut R) -> Result<EvalResult> {
    evaluate_policy(env, episodes, rng, |obs| Ok(super::agent::argmax(&q_values(agent, obs)?)))
}

/// Uniform-random policy; actions come from `action_rng` so resets follow
/// the same `rng` stream as [`evaluate`].
pub fn evaluate_random<R: Rng + ?Sized, A: Rng>(
    env: &Env,
    episodes: usize,
    rng: &mut R,
    action_rng: &mut A,
) -> Result<EvalResult> {
    let n = env.spec().num_actions;
    evaluate_policy(env, episodes, rng, |_| Ok(action_rng.random_range(0..n)))
}
