use rand::seq::index;

use super::env::Observation;
use crate::error::{Error, Result};
use crate::rng::{self, SimRng};

/// One stored step `(s_t, a_t, r_t, s_{t+1}, terminal)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Observation,
    pub action: usize,
    pub reward: f64,
    pub next_state: Observation,
    pub terminal: bool,
}

/// Fixed-capacity ring of transitions with its own sampling stream.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    storage: Vec<Transition>,
    next: usize,
    rng: SimRng,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, seed: u64) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::usage("replay capacity must be positive"));
        }
        Ok(Self { capacity, storage: Vec::with_capacity(capacity.min(1 << 16)), next: 0, rng: rng::seeded(seed) })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    /// Stores a transition, overwriting the oldest once full.
    pub fn push(&mut self, transition: Transition) -> Result<()> {
        if !transition.reward.is_finite() {
            return Err(Error::domain(format!("non-finite reward {}", transition.reward)));
        }
        if self.storage.len() < self.capacity {
            self.storage.push(transition);
        } else {
            self.storage[self.next] = transition;
        }
        self.next = (self.next + 1) % self.capacity;
        Ok(())
    }

    pub fn get(&self, index: usize) -> Option<&Transition> {
        self.storage.get(index)
    }

    /// Storage indices of a uniform batch drawn without replacement, or
    /// `None` while fewer than `batch_size` transitions are stored.
    pub fn sample_indices(&mut self, batch_size: usize) -> Option<Vec<usize>> {
        if batch_size == 0 || self.storage.len() < batch_size {
            return None;
        }
        Some(index::sample(&mut self.rng, self.storage.len(), batch_size).into_vec())
    }

    pub fn sample(&mut self, batch_size: usize) -> Option<Vec<Transition>> {
        let picks = self.sample_indices(batch_size)?;
        Some(picks.into_iter().map(|i| self.storage[i].clone()).collect())
    }
}
