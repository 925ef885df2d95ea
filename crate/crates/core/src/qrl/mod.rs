//! Quantum Q-learning: a circuit approximates `Q(s, a)`, trained on
//! replayed transitions against a periodically synced target copy.

mod agent;
mod env;
mod replay;
mod train;

pub use agent::{
    argmax, batch_loss_and_grad, bellman_targets, q_values, q_values_measured, select_action, train_step,
    AgentCheckpoint, QrlAgent, AGENT_SCHEMA,
};
pub use env::{
    cart_action, cartpole, cartpole_dynamics, lake_action, lake_transition, Env, EnvKind, EnvSpec, Observation,
    ObservationSpace, Step, FROZEN_LAKE_MAP,
};
pub use replay::{ReplayBuffer, Transition};
pub use train::{
    evaluate, evaluate_policy, evaluate_random, run_training, run_training_with, EpisodeMetrics, EvalPoint, EvalResult,
    MetricsWriter, QrlConfig, TrainingReport, METRICS_HEADER,
};
