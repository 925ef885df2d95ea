use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::encoding::{basis_encode, encode, EncodingSpec};
use crate::error::{Error, Result};
use crate::rng;
use crate::sim::{GateOp, Statevector};

/// CNOT pattern opening every layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entangler {
    /// `CNOT(i, i+1)` for `i = 0..U-1`.
    Chain,
    /// The chain plus `CNOT(U-1, 0)`.
    Ring,
}

impl Entangler {
    /// Chain up to two qubits, ring from three (on two wires a ring would
    /// apply CNOT(0,1) and CNOT(1,0) back to back).
    pub fn default_for(num_qubits: usize) -> Self {
        if num_qubits <= 2 {
            Entangler::Chain
        } else {
            Entangler::Ring
        }
    }

    pub fn gates(self, num_qubits: usize) -> Vec<GateOp> {
        let mut gates: Vec<GateOp> =
            (0..num_qubits.saturating_sub(1)).map(|i| GateOp::Cnot { control: i, target: i + 1 }).collect();
        if self == Entangler::Ring && num_qubits >= 2 {
            gates.push(GateOp::Cnot { control: num_qubits - 1, target: 0 });
        }
        gates
    }
}

impl fmt::Display for Entangler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Entangler::Chain => "chain",
            Entangler::Ring => "ring",
        })
    }
}

/// Rotation angles of one layer: `RX(alphas[i])`, `RY(betas[i])`,
/// `RZ(gammas[i])` on wire `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PqcLayer {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
}

impl PqcLayer {
    pub fn zeros(num_qubits: usize) -> Self {
        Self { alphas: vec![0.0; num_qubits], betas: vec![0.0; num_qubits], gammas: vec![0.0; num_qubits] }
    }
}

/// Encoding, `depth` layers and per-wire Z readout on `num_qubits` wires.
///
/// Parameters are stored flat in layer-major order; inside a layer the
/// `U` alphas come first, then the betas, then the gammas, so parameter
/// `k` lives in layer `k / 3U`, block `(k % 3U) / U`, wire `k % U`.
#[derive(Debug, Clone, PartialEq)]
pub struct VqcModel {
    num_qubits: usize,
    depth: usize,
    entangler: Entangler,
    encoding: EncodingSpec,
    params: Vec<f64>,
}

/// Half-width of the default uniform initialisation interval.
pub const INIT_HALF_WIDTH: f64 = PI / 100.0;

impl VqcModel {
    /// Model with every rotation angle zero.
    pub fn new(num_qubits: usize, depth: usize, entangler: Entangler, encoding: EncodingSpec) -> Result<Self> {
        crate::sim::Statevector::zero_state(num_qubits)?;
        encoding.validate()?;
        Ok(Self { num_qubits, depth, entangler, encoding, params: vec![0.0; 3 * num_qubits * depth] })
    }

    /// Angles drawn uniformly from `(-π/100, π/100)`.
    pub fn random<R: Rng + ?Sized>(
        num_qubits: usize,
        depth: usize,
        entangler: Entangler,
        encoding: EncodingSpec,
        rng: &mut R,
    ) -> Result<Self> {
        Self::random_in(num_qubits, depth, entangler, encoding, INIT_HALF_WIDTH, rng)
    }

    /// Angles drawn uniformly from `(-half_width, half_width)`.
    pub fn random_in<R: Rng + ?Sized>(
        num_qubits: usize,
        depth: usize,
        entangler: Entangler,
        encoding: EncodingSpec,
        half_width: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let mut model = Self::new(num_qubits, depth, entangler, encoding)?;
        for p in &mut model.params {
            *p = rng.random_range(-half_width..half_width);
        }
        Ok(model)
    }

    pub fn seeded(
        num_qubits: usize,
        depth: usize,
        entangler: Entangler,
        encoding: EncodingSpec,
        seed: u64,
    ) -> Result<Self> {
        Self::random(num_qubits, depth, entangler, encoding, &mut rng::seeded(seed))
    }

    pub fn from_layers(layers: &[PqcLayer], entangler: Entangler, encoding: EncodingSpec) -> Result<Self> {
        let num_qubits = layers
            .first()
            .map(|l| l.alphas.len())
            .ok_or_else(|| Error::usage("from_layers needs at least one layer; use VqcModel::new for depth 0"))?;
        let mut model = Self::new(num_qubits, layers.len(), entangler, encoding)?;
        for (l, layer) in layers.iter().enumerate() {
            model.set_layer(l, layer)?;
        }
        Ok(model)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn entangler(&self) -> Entangler {
        self.entangler
    }

    pub fn encoding(&self) -> &EncodingSpec {
        &self.encoding
    }

    pub fn set_encoding(&mut self, encoding: EncodingSpec) -> Result<()> {
        encoding.validate()?;
        self.encoding = encoding;
        Ok(())
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::usage(format!("expected {} parameters, got {}", self.params.len(), params.len())));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::domain("parameters must be finite"));
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    pub fn with_params(mut self, params: &[f64]) -> Result<Self> {
        self.set_params(params)?;
        Ok(self)
    }

    pub fn layer(&self, index: usize) -> Option<PqcLayer> {
        let u = self.num_qubits;
        let chunk = self.params.chunks_exact(3 * u).nth(index)?;
        Some(PqcLayer { alphas: chunk[..u].to_vec(), betas: chunk[u..2 * u].to_vec(), gammas: chunk[2 * u..].to_vec() })
    }

    pub fn layers(&self) -> Vec<PqcLayer> {
        (0..self.depth).filter_map(|l| self.layer(l)).collect()
    }

    pub fn set_layer(&mut self, index: usize, layer: &PqcLayer) -> Result<()> {
        let u = self.num_qubits;
        if index >= self.depth {
            return Err(Error::usage(format!("layer {index} out of range for depth {}", self.depth)));
        }
        if [&layer.alphas, &layer.betas, &layer.gammas].iter().any(|v| v.len() != u) {
            return Err(Error::usage(format!("every angle block of a layer needs exactly {u} entries")));
        }
        let chunk = &mut self.params[index * 3 * u..(index + 1) * 3 * u];
        chunk[..u].copy_from_slice(&layer.alphas);
        chunk[u..2 * u].copy_from_slice(&layer.betas);
        chunk[2 * u..].copy_from_slice(&layer.gammas);
        Ok(())
    }

    /// Layer that parameter `k` belongs to.
    pub(crate) fn layer_of(&self, k: usize) -> usize {
        k / (3 * self.num_qubits)
    }

    pub(crate) fn initial_state(&self, input: Input<'_>) -> Result<Statevector> {
        match input {
            Input::Features(x) => encode(x, &self.encoding, self.num_qubits),
            Input::Basis(index) => basis_encode(index, self.num_qubits),
        }
    }

    /// Applies layer `layer` using angles from `params` (a full flat vector).
    pub(crate) fn apply_layer_with(&self, state: &mut Statevector, layer: usize, params: &[f64]) -> Result<()> {
        let u = self.num_qubits;
        for gate in self.entangler.gates(u) {
            state.apply(&gate)?;
        }
        let chunk = &params[layer * 3 * u..(layer + 1) * 3 * u];
        for wire in 0..u {
            state.apply(&GateOp::Rx(wire, chunk[wire]))?;
            state.apply(&GateOp::Ry(wire, chunk[u + wire]))?;
            state.apply(&GateOp::Rz(wire, chunk[2 * u + wire]))?;
        }
        Ok(())
    }

    /// Runs layers `from..depth` on `state` with the given flat parameters.
    pub(crate) fn run_layers_with(&self, state: &mut Statevector, from: usize, params: &[f64]) -> Result<()> {
        for layer in from..self.depth {
            self.apply_layer_with(state, layer, params)?;
        }
        Ok(())
    }
}

/// Circuit input: a real feature vector for angle encoding or a basis index
/// for discrete observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Input<'a> {
    Features(&'a [f64]),
    Basis(usize),
}

impl<'a> From<&'a [f64]> for Input<'a> {
    fn from(x: &'a [f64]) -> Self {
        Input::Features(x)
    }
}

impl<'a> From<&'a Vec<f64>> for Input<'a> {
    fn from(x: &'a Vec<f64>) -> Self {
        Input::Features(x)
    }
}

/// Readout mode: exact expectations, or the mean of `shots` sampled ±1
/// outcomes per wire drawn from a generator seeded with `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum MeasurementConfig {
    #[default]
    Analytic,
    Shots {
        shots: u64,
        seed: u64,
    },
}

impl MeasurementConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            MeasurementConfig::Shots { shots: 0, .. } => Err(Error::usage("shots must be at least 1")),
            _ => Ok(()),
        }
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self, MeasurementConfig::Analytic)
    }
}

/// Applies the entangler of `model` followed by the rotations of layer
/// `layer_index`.
pub fn pqc_apply(state: Statevector, model: &VqcModel, layer_index: usize) -> Result<Statevector> {
    if layer_index >= model.depth {
        return Err(Error::usage(format!("layer {layer_index} out of range for depth {}", model.depth)));
    }
    if state.num_qubits() != model.num_qubits {
        return Err(Error::domain(format!(
            "state has {} qubit(s), model expects {}",
            state.num_qubits(),
            model.num_qubits
        )));
    }
    let mut state = state;
    model.apply_layer_with(&mut state, layer_index, &model.params)?;
    Ok(state)
}

/// State after encoding and all layers, before readout.
pub fn forward_state(model: &VqcModel, input: Input<'_>) -> Result<Statevector> {
    let mut state = model.initial_state(input)?;
    model.run_layers_with(&mut state, 0, &model.params)?;
    Ok(state)
}

/// Per-wire Z expectations (or their shot estimates) of the model output.
pub fn forward(model: &VqcModel, input: Input<'_>, measurement: &MeasurementConfig) -> Result<Vec<f64>> {
    measurement.validate()?;
    let state = forward_state(model, input)?;
    match *measurement {
        MeasurementConfig::Analytic => Ok(state.expectations_z()),
        MeasurementConfig::Shots { shots, seed } => {
            let mut rng = rng::seeded(seed);
            (0..model.num_qubits).map(|w| state.sample_z_mean(w, shots, &mut rng)).collect()
        }
    }
}
