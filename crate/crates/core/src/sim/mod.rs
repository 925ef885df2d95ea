//! Exact statevector simulation of the X, Y, Z, RX, RY, RZ, CNOT and CZ gate
//! set with analytic and sampled Pauli-Z readout.
//!
//! Amplitude indices are big-endian: qubit 0 is the most significant bit of
//! the index, so `|10⟩` on two qubits is index 2.

mod dense;
mod gate;
mod measure;
mod state;

pub use dense::{dense_apply_oracle, embed_gate, DenseMatrix, DENSE_ORACLE_MAX_QUBITS};
pub use gate::{gate_matrix, GateKind, GateOp};
pub use state::{Amp, StateDump, Statevector, DEFAULT_MAX_QUBITS};
