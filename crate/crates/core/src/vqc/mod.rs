//! Variational quantum circuits: angle encoding, a stack of
//! entangle-then-rotate layers and per-wire Pauli-Z readout.

mod checkpoint;
mod encoding;
mod grad;
mod model;

pub(crate) use checkpoint::{check_schema, json_error};
pub use checkpoint::{deserialize_model, serialize_model, ModelCheckpoint, MODEL_SCHEMA};
pub use encoding::{basis_encode, encode, phi, EncodingSpec, Nonlinearity};
pub use grad::{finite_diff_grad, gradient, parameter_shift_grad, parameter_shift_grad_with_shift, PARAMETER_SHIFT};
pub use model::{
    forward, forward_state, pqc_apply, Entangler, Input, MeasurementConfig, PqcLayer, VqcModel, INIT_HALF_WIDTH,
};
