//! Variational quantum circuit laboratory.
//!
//! * [`sim`]: exact statevector simulation of the Pauli, Pauli-rotation,
//!   CNOT and CZ gates with Pauli-Z readout.
//! * [`vqc`]: angle encoding, stacked entangle-and-rotate layers, per-wire
//!   Z measurement and parameter-shift gradients.
//! * [`optim`]: SGD, Adam and the MSE / MAE / Huber losses.
//! * [`qrl`]: Q-learning with a circuit as the value function, experience
//!   replay and a target network, on FrozenLake and CartPole.
//! * [`quanv`]: quantum convolution of 2D feature maps.

pub mod error;
pub mod optim;
pub mod qrl;
pub mod quanv;
pub mod rng;
pub mod sim;
pub mod vqc;

pub use error::{Error, Result};
pub use sim::{GateKind, GateOp, Statevector};
pub use vqc::{EncodingSpec, Entangler, Input, MeasurementConfig, Nonlinearity, VqcModel};
