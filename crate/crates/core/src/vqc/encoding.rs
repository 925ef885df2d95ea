use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{GateOp, Statevector};

/// Squashing function applied to each feature before it becomes an angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nonlinearity {
    /// `1 / (1 + e^-x)`, mapping the real line into (0, 1).
    #[default]
    Sigmoid,
    /// `min(max(x, 0), 1)`.
    Clamp01,
    /// Identity; the caller is responsible for the input range.
    None,
}

/// How a feature vector becomes RY angles: wire `i` is rotated by
/// `scale · φ(x_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncodingSpec {
    pub nonlinearity: Nonlinearity,
    pub scale: f64,
}

impl Default for EncodingSpec {
    fn default() -> Self {
        Self { nonlinearity: Nonlinearity::Sigmoid, scale: FRAC_PI_2 }
    }
}

impl EncodingSpec {
    pub fn new(nonlinearity: Nonlinearity, scale: f64) -> Self {
        Self { nonlinearity, scale }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !self.scale.is_finite() {
            return Err(Error::domain(format!("encoding scale must be finite, got {}", self.scale)));
        }
        Ok(())
    }

    /// RY angle for a single feature.
    pub fn angle(&self, x: f64) -> Result<f64> {
        Ok(self.scale * phi(x, self)?)
    }
}

pub fn phi(x: f64, spec: &EncodingSpec) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("feature value {x} is not finite")));
    }
    Ok(match spec.nonlinearity {
        Nonlinearity::Sigmoid => 1.0 / (1.0 + (-x).exp()),
        Nonlinearity::Clamp01 => x.clamp(0.0, 1.0),
        Nonlinearity::None => x,
    })
}

/// Product state `⊗_i RY(scale·φ(x_i)) |0⟩` on `num_qubits` wires.
pub fn encode(x: &[f64], spec: &EncodingSpec, num_qubits: usize) -> Result<Statevector> {
    if x.len() != num_qubits {
        return Err(Error::domain(format!(
            "feature vector has {} entries but the register has {num_qubits} qubit(s)",
            x.len()
        )));
    }
    spec.validate()?;
    let mut state = Statevector::zero_state(num_qubits)?;
    for (wire, &xi) in x.iter().enumerate() {
        state.apply(&GateOp::Ry(wire, spec.angle(xi)?))?;
    }
    Ok(state)
}

/// Discrete observation `state_index` as the basis state `|state_index⟩`.
pub fn basis_encode(state_index: usize, num_qubits: usize) -> Result<Statevector> {
    Statevector::basis_state(num_qubits, state_index)
}
