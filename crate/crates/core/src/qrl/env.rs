//! Deterministic 4×4 FrozenLake and Euler-integrated CartPole.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String")]
pub enum EnvKind {
    #[serde(rename = "frozenlake")]
    FrozenLake4x4,
    #[serde(rename = "cartpole")]
    CartPole,
}

impl EnvKind {
    pub fn spec(self) -> EnvSpec {
        match self {
            EnvKind::FrozenLake4x4 => {
                EnvSpec { kind: self, observation: ObservationSpace::Discrete(16), num_actions: 4, step_cap: 100 }
            }
            EnvKind::CartPole => {
                EnvSpec { kind: self, observation: ObservationSpace::Box(4), num_actions: 2, step_cap: 500 }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EnvKind::FrozenLake4x4 => "frozenlake",
            EnvKind::CartPole => "cartpole",
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl TryFrom<String> for EnvKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "frozenlake" | "frozenlake4x4" => Ok(EnvKind::FrozenLake4x4),
            "cartpole" => Ok(EnvKind::CartPole),
            other => Err(Error::usage(format!(
                "env: unknown environment {other:?} (expected \"frozenlake\" or \"cartpole\")"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservationSpace {
    /// `n` discrete states, indexed `0..n`.
    Discrete(usize),
    /// Real vector of the given length.
    Box(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnvSpec {
    pub kind: EnvKind,
    pub observation: ObservationSpace,
    pub num_actions: usize,
    pub step_cap: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Observation {
    Discrete(usize),
    Continuous(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub observation: Observation,
    pub reward: f64,
    pub terminal: bool,
}

/// FrozenLake layout, row-major: S start, F frozen, H hole, G goal.
pub const FROZEN_LAKE_MAP: [&str; 4] = ["SFFF", "FHFH", "FFFH", "HFFG"];

pub mod lake_action {
    pub const LEFT: usize = 0;
    pub const DOWN: usize = 1;
    pub const RIGHT: usize = 2;
    pub const UP: usize = 3;
}

pub mod cart_action {
    pub const PUSH_LEFT: usize = 0;
    pub const PUSH_RIGHT: usize = 1;
}

fn lake_cell(state: usize) -> u8 {
    FROZEN_LAKE_MAP[state / 4].as_bytes()[state % 4]
}

/// Successor cell of a non-slippery move; moves into a wall stay put.
pub fn lake_transition(state: usize, action: usize) -> usize {
    let (row, col) = (state / 4, state % 4);
    let (row, col) = match action {
        lake_action::LEFT => (row, col.saturating_sub(1)),
        lake_action::DOWN => ((row + 1).min(3), col),
        lake_action::RIGHT => (row, (col + 1).min(3)),
        lake_action::UP => (row.saturating_sub(1), col),
        _ => unreachable!("action validated by caller"),
    };
    row * 4 + col
}

/// Classic cart-pole constants.
pub mod cartpole {
    pub const GRAVITY: f64 = 9.8;
    pub const CART_MASS: f64 = 1.0;
    pub const POLE_MASS: f64 = 0.1;
    pub const TOTAL_MASS: f64 = CART_MASS + POLE_MASS;
    /// Half the pole length.
    pub const HALF_LENGTH: f64 = 0.5;
    pub const POLE_MASS_LENGTH: f64 = POLE_MASS * HALF_LENGTH;
    pub const FORCE: f64 = 10.0;
    pub const DT: f64 = 0.02;
    pub const ANGLE_LIMIT_RAD: f64 = 12.0 * 2.0 * std::f64::consts::PI / 360.0;
    pub const POSITION_LIMIT: f64 = 2.4;
    pub const RESET_HALF_WIDTH: f64 = 0.05;
}

/// One explicit-Euler step of `[x, x_dot, theta, theta_dot]` under
/// `force` (positive pushes right).
pub fn cartpole_dynamics(state: [f64; 4], force: f64) -> [f64; 4] {
    use cartpole::*;
    let [x, x_dot, theta, theta_dot] = state;
    let (sin, cos) = theta.sin_cos();
    let temp = (force + POLE_MASS_LENGTH * theta_dot * theta_dot * sin) / TOTAL_MASS;
    let theta_acc = (GRAVITY * sin - cos * temp) / (HALF_LENGTH * (4.0 / 3.0 - POLE_MASS * cos * cos / TOTAL_MASS));
    let x_acc = temp - POLE_MASS_LENGTH * theta_acc * cos / TOTAL_MASS;
    [x + DT * x_dot, x_dot + DT * x_acc, theta + DT * theta_dot, theta_dot + DT * theta_acc]
}

#[derive(Debug, Clone, PartialEq)]
enum EnvState {
    Lake(usize),
    Cart([f64; 4]),
}

/// A running environment instance.
#[derive(Debug, Clone)]
pub struct Env {
    spec: EnvSpec,
    state: EnvState,
    steps: usize,
    done: bool,
}

impl Env {
    pub fn new(kind: EnvKind) -> Self {
        let spec = kind.spec();
        let state = match kind {
            EnvKind::FrozenLake4x4 => EnvState::Lake(0),
            EnvKind::CartPole => EnvState::Cart([0.0; 4]),
        };
        Self { spec, state, steps: 0, done: true }
    }

    /// Overrides the episode step cap (0 ends every episode at reset).
    pub fn with_step_cap(mut self, cap: usize) -> Self {
        self.spec.step_cap = cap;
        self
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// True when FrozenLake is standing on the goal cell.
    pub fn at_goal(&self) -> bool {
        matches!(self.state, EnvState::Lake(s) if lake_cell(s) == b'G')
    }

    pub fn observation(&self) -> Observation {
        match &self.state {
            EnvState::Lake(s) => Observation::Discrete(*s),
            EnvState::Cart(v) => Observation::Continuous(v.to_vec()),
        }
    }

    pub fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Observation {
        self.state = match self.spec.kind {
            EnvKind::FrozenLake4x4 => EnvState::Lake(0),
            EnvKind::CartPole => {
                let h = cartpole::RESET_HALF_WIDTH;
                EnvState::Cart(std::array::from_fn(|_| rng.random_range(-h..h)))
            }
        };
        self.steps = 0;
        self.done = self.spec.step_cap == 0;
        self.observation()
    }

    /// Starts a CartPole episode from an explicit `[x, x_dot, theta, theta_dot]`.
    pub fn cartpole_from(state: [f64; 4]) -> Result<Self> {
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("cart-pole state must be finite"));
        }
        let mut env = Self::new(EnvKind::CartPole);
        env.state = EnvState::Cart(state);
        env.steps = 0;
        env.done = env.spec.step_cap == 0;
        Ok(env)
    }

    pub fn step(&mut self, action: usize) -> Result<Step> {
        if action >= self.spec.num_actions {
            return Err(Error::usage(format!(
                "action {action} out of range for {} ({} actions)",
                self.spec.kind, self.spec.num_actions
            )));
        }
        if self.done {
            return Err(Error::usage("step called on a finished episode; reset first"));
        }
        self.steps += 1;
        let capped = self.steps >= self.spec.step_cap;
        let (reward, terminal) = match &mut self.state {
            EnvState::Lake(s) => {
                *s = lake_transition(*s, action);
                match lake_cell(*s) {
                    b'G' => (1.0, true),
                    b'H' => (0.0, true),
                    _ => (0.0, capped),
                }
            }
            EnvState::Cart(v) => {
                let force = if action == cart_action::PUSH_RIGHT { cartpole::FORCE } else { -cartpole::FORCE };
                *v = cartpole_dynamics(*v, force);
                let fallen = v[2].abs() > cartpole::ANGLE_LIMIT_RAD || v[0].abs() > cartpole::POSITION_LIMIT;
                (1.0, fallen || capped)
            }
        };
        self.done = terminal;
        Ok(Step { observation: self.observation(), reward, terminal })
    }
}
