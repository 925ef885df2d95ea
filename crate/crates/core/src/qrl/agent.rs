use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::env::{EnvKind, EnvSpec, Observation, ObservationSpace};
use super::replay::{ReplayBuffer, Transition};
use crate::error::{Error, Result};
use crate::optim::{loss_and_grad, LossKind, Optimizer};
use crate::vqc::{
    check_schema, forward, json_error, parameter_shift_grad, Input, MeasurementConfig, ModelCheckpoint, VqcModel,
};

/// Q-learning agent whose action values are read off a circuit:
/// `Q(s, a) = action_scale[a] · ⟨Z_a⟩`, for the first `|A|` wires.
///
/// The target copy (`θ⁻` and its action scales) changes only in
/// [`sync_target`](Self::sync_target).
#[derive(Debug, Clone, PartialEq)]
pub struct QrlAgent {
    spec: EnvSpec,
    online: VqcModel,
    target: VqcModel,
    action_scale: Vec<f64>,
    target_action_scale: Vec<f64>,
    gamma: f64,
    target_sync_interval: u64,
    step: u64,
}

impl QrlAgent {
    pub fn new(
        spec: EnvSpec,
        model: VqcModel,
        gamma: f64,
        target_sync_interval: u64,
        action_scale_init: f64,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::usage(format!("discount must lie in [0, 1), got {gamma}")));
        }
        if target_sync_interval == 0 {
            return Err(Error::usage("target_sync_interval must be positive"));
        }
        if !action_scale_init.is_finite() {
            return Err(Error::usage("action scale must be finite"));
        }
        let u = model.num_qubits();
        if spec.num_actions > u {
            return Err(Error::domain(format!(
                "{} actions need at least {} readout wires, model has {u}",
                spec.num_actions, spec.num_actions
            )));
        }
        match spec.observation {
            ObservationSpace::Discrete(n) if n > (1usize << u) => {
                return Err(Error::domain(format!("{n} discrete states do not fit in 2^{u} basis states")))
            }
            ObservationSpace::Box(d) if d != u => {
                return Err(Error::domain(format!(
                    "{d}-dimensional observations need {d} qubits for angle encoding, model has {u}"
                )))
            }
            _ => {}
        }
        let action_scale = vec![action_scale_init; spec.num_actions];
        Ok(Self {
            spec,
            target: model.clone(),
            online: model,
            target_action_scale: action_scale.clone(),
            action_scale,
            gamma,
            target_sync_interval,
            step: 0,
        })
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    pub fn online(&self) -> &VqcModel {
        &self.online
    }

    pub fn target(&self) -> &VqcModel {
        &self.target
    }

    pub fn action_scale(&self) -> &[f64] {
        &self.action_scale
    }

    pub fn set_action_scale(&mut self, scale: &[f64]) -> Result<()> {
        if scale.len() != self.spec.num_actions {
            return Err(Error::usage(format!("expected {} action scales, got {}", self.spec.num_actions, scale.len())));
        }
        self.action_scale.copy_from_slice(scale);
        Ok(())
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn set_gamma(&mut self, gamma: f64) -> Result<()> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::usage(format!("discount must lie in [0, 1), got {gamma}")));
        }
        self.gamma = gamma;
        Ok(())
    }

    /// Number of completed train steps.
    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn target_sync_interval(&self) -> u64 {
        self.target_sync_interval
    }

    /// Flat trainable vector: circuit parameters followed by action scales.
    pub fn trainable(&self) -> Vec<f64> {
        let mut v = self.online.params().to_vec();
        v.extend_from_slice(&self.action_scale);
        v
    }

    pub fn num_trainable(&self) -> usize {
        self.online.num_params() + self.spec.num_actions
    }

    pub fn set_trainable(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.num_trainable() {
            return Err(Error::usage(format!(
                "expected {} trainable values, got {}",
                self.num_trainable(),
                values.len()
            )));
        }
        let (theta, scale) = values.split_at(self.online.num_params());
        self.online.set_params(theta)?;
        self.action_scale.copy_from_slice(scale);
        Ok(())
    }

    /// Hard copy of the online parameters into the target.
    pub fn sync_target(&mut self) {
        self.target = self.online.clone();
        self.target_action_scale = self.action_scale.clone();
    }

    pub(crate) fn input<'a>(&self, obs: &'a Observation) -> Result<Input<'a>> {
        match (obs, self.spec.observation) {
            (Observation::Discrete(s), ObservationSpace::Discrete(n)) if *s < n => Ok(Input::Basis(*s)),
            (Observation::Continuous(v), ObservationSpace::Box(d)) if v.len() == d => Ok(Input::Features(v)),
            _ => Err(Error::domain(format!("observation {obs:?} does not match {} observations", self.spec.kind))),
        }
    }

    fn q_from(
        &self,
        model: &VqcModel,
        scale: &[f64],
        obs: &Observation,
        measurement: &MeasurementConfig,
    ) -> Result<Vec<f64>> {
        let z = forward(model, self.input(obs)?, measurement)?;
        Ok(scale.iter().zip(&z).map(|(s, z)| s * z).collect())
    }

    pub fn target_q_values(&self, obs: &Observation) -> Result<Vec<f64>> {
        self.q_from(&self.target, &self.target_action_scale, obs, &MeasurementConfig::Analytic)
    }
}

/// Online action values with analytic readout.
pub fn q_values(agent: &QrlAgent, obs: &Observation) -> Result<Vec<f64>> {
    q_values_measured(agent, obs, &MeasurementConfig::Analytic)
}

pub fn q_values_measured(agent: &QrlAgent, obs: &Observation, measurement: &MeasurementConfig) -> Result<Vec<f64>> {
    agent.q_from(&agent.online, &agent.action_scale, obs, measurement)
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// ε-greedy choice. One uniform draw decides between exploring and
/// exploiting; exploring draws the action uniformly.
pub fn select_action<R: Rng + ?Sized>(qvals: &[f64], epsilon: f64, rng: &mut R) -> usize {
    debug_assert!((0.0..=1.0).contains(&epsilon));
    if rng.random::<f64>() < epsilon {
        rng.random_range(0..qvals.len())
    } else {
        argmax(qvals)
    }
}

/// `r` for terminal transitions, else `r + γ · max_a' Q_target(s', a')`.
pub fn bellman_targets(batch: &[Transition], agent: &QrlAgent) -> Result<Vec<f64>> {
    batch
        .par_iter()
        .map(|t| {
            if t.terminal || agent.gamma == 0.0 {
                return Ok(t.reward);
            }
            let q_next = agent.target_q_values(&t.next_state)?;
            let best = q_next.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok(t.reward + agent.gamma * best)
        })
        .collect()
}

/// Loss of the online values of the taken actions against fixed `targets`,
/// and its gradient with respect to [`QrlAgent::trainable`].
pub fn batch_loss_and_grad(
    agent: &QrlAgent,
    batch: &[Transition],
    targets: &[f64],
    loss: LossKind,
) -> Result<(f64, Vec<f64>)> {
    if batch.is_empty() || batch.len() != targets.len() {
        return Err(Error::usage("batch and targets must be non-empty and equally long"));
    }
    if let Some(t) = batch.iter().find(|t| t.action >= agent.spec.num_actions) {
        return Err(Error::usage(format!("transition action {} out of range", t.action)));
    }
    let readout: Vec<f64> = batch
        .par_iter()
        .map(|t| {
            let z = forward(&agent.online, agent.input(&t.state)?, &MeasurementConfig::Analytic)?;
            Ok(z[t.action])
        })
        .collect::<Result<_>>()?;
    let preds: Vec<f64> = batch.iter().zip(&readout).map(|(t, z)| agent.action_scale[t.action] * z).collect();
    let (value, dpred) = loss_and_grad(loss, &preds, targets)?;

    let u = agent.online.num_qubits();
    let per_sample: Vec<Vec<f64>> = batch
        .par_iter()
        .zip(&dpred)
        .map(|(t, &d)| {
            let mut upstream = vec![0.0; u];
            upstream[t.action] = d * agent.action_scale[t.action];
            parameter_shift_grad(&agent.online, agent.input(&t.state)?, &upstream)
        })
        .collect::<Result<_>>()?;

    let n_theta = agent.online.num_params();
    let mut grad = vec![0.0; agent.num_trainable()];
    for g in &per_sample {
        for (acc, v) in grad[..n_theta].iter_mut().zip(g) {
            *acc += v;
        }
    }
    for ((t, z), d) in batch.iter().zip(&readout).zip(&dpred) {
        grad[n_theta + t.action] += d * z;
    }
    Ok((value, grad))
}

/// One optimisation step on a uniformly sampled batch. Returns `None`
/// while the buffer holds fewer than `batch_size` transitions.
pub fn train_step(
    agent: &mut QrlAgent,
    buffer: &mut ReplayBuffer,
    batch_size: usize,
    loss: LossKind,
    optimizer: &mut Optimizer,
) -> Result<Option<f64>> {
    let Some(batch) = buffer.sample(batch_size) else {
        return Ok(None);
    };
    let targets = bellman_targets(&batch, agent)?;
    let (value, grad) = batch_loss_and_grad(agent, &batch, &targets, loss)?;
    let mut params = agent.trainable();
    optimizer.step(&mut params, &grad)?;
    agent.set_trainable(&params)?;
    agent.step += 1;
    if agent.step % agent.target_sync_interval == 0 {
        agent.sync_target();
    }
    Ok(Some(value))
}

pub const AGENT_SCHEMA: &str = "qrl-v1";

/// Checkpoint JSON: the online model in its `vqc-v1` form plus the
/// Q-learning state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentCheckpoint {
    pub schema: String,
    pub env: EnvKind,
    pub model: ModelCheckpoint,
    pub action_scale: Vec<f64>,
    pub gamma: f64,
    pub step: u64,
    pub target_sync_interval: u64,
    pub seed: u64,
}

impl AgentCheckpoint {
    pub fn new(agent: &QrlAgent, seed: u64) -> Self {
        Self {
            schema: AGENT_SCHEMA.into(),
            env: agent.spec.kind,
            model: ModelCheckpoint::from(&agent.online),
            action_scale: agent.action_scale.clone(),
            gamma: agent.gamma,
            step: agent.step,
            target_sync_interval: agent.target_sync_interval,
            seed,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        check_schema(text, AGENT_SCHEMA)?;
        serde_json::from_str(text).map_err(json_error)
    }

    /// Rebuilds the agent; the target copy starts equal to the online model.
    pub fn into_agent(self) -> Result<QrlAgent> {
        let model = self.model.into_model()?;
        let mut agent = QrlAgent::new(self.env.spec(), model, self.gamma, self.target_sync_interval, 1.0)?;
        agent.set_action_scale(&self.action_scale)?;
        agent.sync_target();
        agent.step = self.step;
        Ok(agent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qrl::env::EnvKind;
    use crate::rng;
    use crate::vqc::{EncodingSpec, Entangler};

    fn lake_agent(seed: u64) -> QrlAgent {
        let model = VqcModel::seeded(4, 2, Entangler::Ring, EncodingSpec::default(), seed).unwrap();
        QrlAgent::new(EnvKind::FrozenLake4x4.spec(), model, 0.9, 50, 1.0).unwrap()
    }

    fn lake_t(s: usize, a: usize, r: f64, s2: usize, terminal: bool) -> Transition {
        Transition {
            state: Observation::Discrete(s),
            action: a,
            reward: r,
            next_state: Observation::Discrete(s2),
            terminal,
        }
    }

    #[test]
    fn zero_scale_gives_zero_q() {
        let mut agent = lake_agent(1);
        agent.set_action_scale(&[0.0; 4]).unwrap();
        assert_eq!(q_values(&agent, &Observation::Discrete(3)).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn q_is_scale_times_readout() {
        let agent = lake_agent(2);
        let q = q_values(&agent, &Observation::Discrete(0)).unwrap();
        let z = forward(agent.online(), Input::Basis(0), &MeasurementConfig::Analytic).unwrap();
        for a in 0..4 {
            assert!((q[a] - z[a]).abs() < 1e-6);
            // near-identity layers keep |0000⟩ close to +1 on every wire
            assert!(q[a] > 0.99);
        }
    }

    #[test]
    fn observation_mismatch() {
        let agent = lake_agent(0);
        assert!(matches!(q_values(&agent, &Observation::Discrete(16)), Err(Error::Domain(_))));
        assert!(matches!(q_values(&agent, &Observation::Continuous(vec![0.0; 4])), Err(Error::Domain(_))));
    }

    #[test]
    fn argmax_and_epsilon() {
        let mut r = rng::seeded(0);
        assert_eq!(select_action(&[0.1, 0.9], 0.0, &mut r), 1);
        assert_eq!(select_action(&[0.5, 0.5], 0.0, &mut r), 0);
        let mut counts = [0usize; 4];
        for _ in 0..10_000 {
            counts[select_action(&[9.0, 0.0, 0.0, 0.0], 1.0, &mut r)] += 1;
        }
        for c in counts {
            assert!((c as f64 / 10_000.0 - 0.25).abs() <= 0.03, "{counts:?}");
        }
    }

    #[test]
    fn target_examples() {
        let mut agent = lake_agent(3);
        let batch = [lake_t(14, 2, 1.0, 15, true)];
        assert_eq!(bellman_targets(&batch, &agent).unwrap(), vec![1.0]);

        let batch = [lake_t(0, 1, 0.0, 4, false)];
        let q_next = agent.target_q_values(&Observation::Discrete(4)).unwrap();
        let max = q_next.iter().copied().fold(f64::MIN, f64::max);
        let targets = bellman_targets(&batch, &agent).unwrap();
        assert!((targets[0] - 0.9 * max).abs() < 1e-15);

        agent.set_gamma(0.0).unwrap();
        let batch = [lake_t(0, 1, 0.25, 4, false), lake_t(1, 0, 0.5, 0, false)];
        assert_eq!(bellman_targets(&batch, &agent).unwrap(), vec![0.25, 0.5]);
    }

    #[test]
    fn target_arithmetic() {
        // force max_a' Q_target(s') = 0.5 with a flat readout: zero angles
        // give ⟨Z⟩ = 1 on |0000⟩, so scales of 0.5 set every Q to 0.5
        let model = VqcModel::new(4, 2, Entangler::Ring, EncodingSpec::default()).unwrap();
        let mut agent = QrlAgent::new(EnvKind::FrozenLake4x4.spec(), model, 0.9, 50, 0.5).unwrap();
        agent.sync_target();
        let targets = bellman_targets(&[lake_t(1, 0, 0.0, 0, false)], &agent).unwrap();
        assert!((targets[0] - 0.45).abs() < 1e-12);
    }

    #[test]
    fn gradient_is_one_hot_per_sample() {
        let agent = lake_agent(4);
        let batch = [lake_t(2, 3, 0.0, 3, false)];
        let (_, grad) = batch_loss_and_grad(&agent, &batch, &[1.0], LossKind::Mse).unwrap();
        let n = agent.online().num_params();
        let scale_grad = &grad[n..];
        assert!(scale_grad[3] != 0.0);
        assert_eq!(&scale_grad[..3], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_lr_keeps_parameters() {
        let mut agent = lake_agent(5);
        let mut buffer = ReplayBuffer::new(16, 0).unwrap();
        for s in 0..8 {
            buffer.push(lake_t(s, s % 4, 0.0, s + 1, false)).unwrap();
        }
        let before = agent.trainable();
        let mut probe = buffer.clone();
        let batch = probe.sample(4).unwrap();
        let targets = bellman_targets(&batch, &agent).unwrap();
        let (pre_loss, _) = batch_loss_and_grad(&agent, &batch, &targets, LossKind::Mse).unwrap();
        let mut opt = Optimizer::sgd(0.0);
        let loss = train_step(&mut agent, &mut buffer, 4, LossKind::Mse, &mut opt).unwrap().unwrap();
        assert_eq!(agent.trainable(), before);
        assert_eq!(loss, pre_loss);
        assert_eq!(agent.step(), 1);
    }

    #[test]
    fn underfull_buffer_is_not_ready() {
        let mut agent = lake_agent(6);
        let mut buffer = ReplayBuffer::new(16, 0).unwrap();
        buffer.push(lake_t(0, 0, 0.0, 0, false)).unwrap();
        let mut opt = Optimizer::sgd(0.1);
        assert_eq!(train_step(&mut agent, &mut buffer, 2, LossKind::Mse, &mut opt).unwrap(), None);
        assert_eq!(agent.step(), 0);
    }

    #[test]
    fn target_syncs_on_interval() {
        let model = VqcModel::seeded(4, 1, Entangler::Ring, EncodingSpec::default(), 7).unwrap();
        let mut agent = QrlAgent::new(EnvKind::FrozenLake4x4.spec(), model, 0.9, 3, 1.0).unwrap();
        let mut buffer = ReplayBuffer::new(16, 1).unwrap();
        for s in 0..10 {
            buffer.push(lake_t(s, (s + 1) % 4, 0.1 * s as f64, (s + 4) % 16, false)).unwrap();
        }
        let mut opt = Optimizer::sgd(0.5);
        let frozen = agent.target().clone();
        let batch: Vec<Transition> = (0..4).map(|i| buffer.get(i).unwrap().clone()).collect();
        let before = bellman_targets(&batch, &agent).unwrap();
        for _ in 0..2 {
            train_step(&mut agent, &mut buffer, 4, LossKind::Mse, &mut opt).unwrap();
            assert_eq!(agent.target(), &frozen);
            assert_eq!(bellman_targets(&batch, &agent).unwrap(), before);
        }
        assert_ne!(agent.online(), &frozen);
        train_step(&mut agent, &mut buffer, 4, LossKind::Mse, &mut opt).unwrap();
        assert_eq!(agent.target(), agent.online());
    }

    #[test]
    fn checkpoint_round_trip() {
        let mut agent = lake_agent(8);
        agent.set_action_scale(&[1.5, 0.5, -0.25, 2.0]).unwrap();
        let json = AgentCheckpoint::new(&agent, 77).to_json();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["model"]["schema"], "vqc-v1");
        assert_eq!(value["gamma"], 0.9);
        let back = AgentCheckpoint::from_json(&json).unwrap();
        assert_eq!(back.seed, 77);
        let restored = back.into_agent().unwrap();
        assert_eq!(restored.online(), agent.online());
        assert_eq!(restored.action_scale(), agent.action_scale());
        assert!(AgentCheckpoint::from_json(&json.replace("qrl-v1", "qrl-v0")).is_err());
    }

    #[test]
    fn construction_checks() {
        let model = VqcModel::seeded(1, 1, Entangler::Chain, EncodingSpec::default(), 0).unwrap();
        assert!(QrlAgent::new(EnvKind::CartPole.spec(), model.clone(), 0.9, 1, 1.0).is_err());
        let model4 = VqcModel::seeded(4, 1, Entangler::Ring, EncodingSpec::default(), 0).unwrap();
        assert!(QrlAgent::new(EnvKind::CartPole.spec(), model4.clone(), 1.0, 1, 1.0).is_err());
        assert!(QrlAgent::new(EnvKind::CartPole.spec(), model4, 0.99, 0, 1.0).is_err());
    }
}
