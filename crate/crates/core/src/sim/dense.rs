//! Dense matrices for building explicit full-register unitaries.
//!
//! Nothing here is used on the simulation path; it exists so the stride
//! kernels in [`Statevector::apply`](super::Statevector::apply) can be checked
//! against a plain `U · ψ` product built from Kronecker factors.

use num_complex::Complex64;

use super::gate::{single_qubit_matrix, GateOp};
use super::state::Statevector;
use crate::error::{Error, Result};

/// Largest register the dense oracle accepts (a 1024×1024 complex matrix).
pub const DENSE_ORACLE_MAX_QUBITS: usize = 10;

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_rows(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::domain(format!("{} entries cannot fill a {dim}x{dim} matrix", data.len())));
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &DenseMatrix) -> DenseMatrix {
        let dim = self.dim * rhs.dim;
        let mut out = DenseMatrix::zeros(dim);
        for r1 in 0..self.dim {
            for c1 in 0..self.dim {
                let a = self.get(r1, c1);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for r2 in 0..rhs.dim {
                    for c2 in 0..rhs.dim {
                        out.set(r1 * rhs.dim + r2, c1 * rhs.dim + c2, a * rhs.get(r2, c2));
                    }
                }
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.dim != rhs.dim {
            return Err(Error::domain(format!("cannot multiply {0}x{0} by {1}x{1}", self.dim, rhs.dim)));
        }
        let n = self.dim;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, rhs.dim);
        DenseMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }

    pub fn adjoint(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn max_abs_diff(&self, rhs: &DenseMatrix) -> f64 {
        self.data.iter().zip(&rhs.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| self.data[i * self.dim..(i + 1) * self.dim].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

fn one_qubit(m: [Complex64; 4]) -> DenseMatrix {
    DenseMatrix { dim: 2, data: m.to_vec() }
}

fn projector(bit: usize) -> DenseMatrix {
    let mut p = DenseMatrix::zeros(2);
    p.set(bit, bit, Complex64::new(1.0, 0.0));
    p
}

/// `f_0 ⊗ f_1 ⊗ … ⊗ f_{n-1}`, with wire 0 leftmost (most significant).
fn kron_chain(factors: Vec<DenseMatrix>) -> DenseMatrix {
    factors.into_iter().reduce(|acc, f| acc.kron(&f)).unwrap_or_else(|| DenseMatrix::identity(1))
}

fn factors_with(num_qubits: usize, placed: &[(usize, DenseMatrix)]) -> Vec<DenseMatrix> {
    (0..num_qubits)
        .map(|w| {
            placed
                .iter()
                .find(|(wire, _)| *wire == w)
                .map(|(_, m)| m.clone())
                .unwrap_or_else(|| DenseMatrix::identity(2))
        })
        .collect()
}

/// Full `2^n × 2^n` unitary of `gate` acting on an `n`-qubit register.
///
/// Controlled gates are assembled from projectors,
/// `|0⟩⟨0|_c ⊗ I + |1⟩⟨1|_c ⊗ P_t`, rather than from their 4×4 blocks.
pub fn embed_gate(gate: &GateOp, num_qubits: usize) -> Result<DenseMatrix> {
    if num_qubits > DENSE_ORACLE_MAX_QUBITS {
        return Err(Error::Resource(format!(
            "dense oracle is limited to {DENSE_ORACLE_MAX_QUBITS} qubits, got {num_qubits}"
        )));
    }
    gate.validate(num_qubits)?;
    let controlled = |control: usize, target: usize, p: DenseMatrix| {
        let idle = kron_chain(factors_with(num_qubits, &[(control, projector(0))]));
        let active = kron_chain(factors_with(num_qubits, &[(control, projector(1)), (target, p)]));
        idle.add(&active)
    };
    Ok(match *gate {
        GateOp::Cnot { control, target } => {
            controlled(control, target, one_qubit(single_qubit_matrix(super::GateKind::X, 0.0)))
        }
        GateOp::Cz(a, b) => controlled(a, b, one_qubit(single_qubit_matrix(super::GateKind::Z, 0.0))),
        _ => {
            let m = single_qubit_matrix(gate.kind(), gate.angle().unwrap_or_default());
            kron_chain(factors_with(num_qubits, &[(gate.wires()[0], one_qubit(m))]))
        }
    })
}

/// Plain matrix-vector product `U · ψ`.
pub fn dense_apply_oracle(state: &Statevector, unitary: &DenseMatrix) -> Result<Statevector> {
    let n = state.num_qubits();
    if n > DENSE_ORACLE_MAX_QUBITS {
        return Err(Error::Resource(format!("dense oracle is limited to {DENSE_ORACLE_MAX_QUBITS} qubits, got {n}")));
    }
    if unitary.dim() != state.amps().len() {
        return Err(Error::domain(format!(
            "matrix dimension {} does not match state dimension {}",
            unitary.dim(),
            state.amps().len()
        )));
    }
    Ok(Statevector::from_raw(n, unitary.mul_vec(state.amps())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_leaves_state_alone() {
        let psi = Statevector::basis_state(3, 5).unwrap();
        let out = dense_apply_oracle(&psi, &DenseMatrix::identity(8)).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn x_tensor_identity_on_00() {
        let xi = embed_gate(&GateOp::X(0), 2).unwrap();
        let out = dense_apply_oracle(&Statevector::zero_state(2).unwrap(), &xi).unwrap();
        assert_eq!(out, Statevector::basis_state(2, 2).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_domain_error() {
        let psi = Statevector::zero_state(2).unwrap();
        let err = dense_apply_oracle(&psi, &DenseMatrix::identity(8)).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn embedded_two_qubit_gates_match_their_blocks() {
        let cnot = embed_gate(&GateOp::Cnot { control: 0, target: 1 }, 2).unwrap();
        let block = super::super::gate_matrix(super::super::GateKind::CNOT, None).unwrap();
        assert!(cnot.max_abs_diff(&block) < 1e-15);
        let cz = embed_gate(&GateOp::Cz(1, 0), 2).unwrap();
        let block = super::super::gate_matrix(super::super::GateKind::CZ, None).unwrap();
        assert!(cz.max_abs_diff(&block) < 1e-15);
    }
}
