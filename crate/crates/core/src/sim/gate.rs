use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dense::DenseMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    X,
    Y,
    Z,
    RX,
    RY,
    RZ,
    CNOT,
    CZ,
}

impl GateKind {
    pub const ALL: [GateKind; 8] =
        [GateKind::X, GateKind::Y, GateKind::Z, GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::CNOT, GateKind::CZ];

    pub fn is_rotation(self) -> bool {
        matches!(self, GateKind::RX | GateKind::RY | GateKind::RZ)
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::CNOT | GateKind::CZ => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A gate placed on concrete wires.
///
/// Rotations carry their angle in radians. `Cz` is symmetric in its two
/// wires; `Cnot` is not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateOp {
    X(usize),
    Y(usize),
    Z(usize),
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    Cnot { control: usize, target: usize },
    Cz(usize, usize),
}

impl GateOp {
    /// Builds a gate from the loose `(kind, angle, wires)` description,
    /// rejecting a missing or superfluous angle and the wrong wire count.
    pub fn new(kind: GateKind, angle: Option<f64>, wires: &[usize]) -> Result<Self> {
        check_angle(kind, angle)?;
        if wires.len() != kind.arity() {
            return Err(Error::usage(format!("{kind} acts on {} wire(s), got {}", kind.arity(), wires.len())));
        }
        let theta = angle.unwrap_or_default();
        Ok(match kind {
            GateKind::X => GateOp::X(wires[0]),
            GateKind::Y => GateOp::Y(wires[0]),
            GateKind::Z => GateOp::Z(wires[0]),
            GateKind::RX => GateOp::Rx(wires[0], theta),
            GateKind::RY => GateOp::Ry(wires[0], theta),
            GateKind::RZ => GateOp::Rz(wires[0], theta),
            GateKind::CNOT => GateOp::Cnot { control: wires[0], target: wires[1] },
            GateKind::CZ => GateOp::Cz(wires[0], wires[1]),
        })
    }

    pub fn kind(&self) -> GateKind {
        match self {
            GateOp::X(_) => GateKind::X,
            GateOp::Y(_) => GateKind::Y,
            GateOp::Z(_) => GateKind::Z,
            GateOp::Rx(..) => GateKind::RX,
            GateOp::Ry(..) => GateKind::RY,
            GateOp::Rz(..) => GateKind::RZ,
            GateOp::Cnot { .. } => GateKind::CNOT,
            GateOp::Cz(..) => GateKind::CZ,
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            GateOp::Rx(_, t) | GateOp::Ry(_, t) | GateOp::Rz(_, t) => Some(t),
            _ => None,
        }
    }

    /// Wires in `(control, target)` order for CNOT.
    pub fn wires(&self) -> Vec<usize> {
        match *self {
            GateOp::X(w) | GateOp::Y(w) | GateOp::Z(w) | GateOp::Rx(w, _) | GateOp::Ry(w, _) | GateOp::Rz(w, _) => {
                vec![w]
            }
            GateOp::Cnot { control, target } => vec![control, target],
            GateOp::Cz(a, b) => vec![a, b],
        }
    }

    pub(crate) fn validate(&self, num_qubits: usize) -> Result<()> {
        let wires = self.wires();
        if let Some(&w) = wires.iter().find(|&&w| w >= num_qubits) {
            return Err(Error::domain(format!(
                "{} on wire {w} but the register has {num_qubits} qubit(s)",
                self.kind()
            )));
        }
        if wires.len() == 2 && wires[0] == wires[1] {
            return Err(Error::domain(format!("{} needs two distinct wires, got {} twice", self.kind(), wires[0])));
        }
        if let Some(theta) = self.angle() {
            if !theta.is_finite() {
                return Err(Error::domain(format!("non-finite rotation angle {theta}")));
            }
        }
        Ok(())
    }
}

fn check_angle(kind: GateKind, angle: Option<f64>) -> Result<()> {
    match (kind.is_rotation(), angle) {
        (true, None) => Err(Error::usage(format!("{kind} requires an angle"))),
        (false, Some(_)) => Err(Error::usage(format!("{kind} takes no angle"))),
        _ => Ok(()),
    }
}

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// 2×2 matrix of a one-qubit gate as `[m00, m01, m10, m11]`.
///
/// Rotations follow `R_P(θ) = exp(-iθP/2) = cos(θ/2)·I − i·sin(θ/2)·P`.
pub(crate) fn single_qubit_matrix(kind: GateKind, theta: f64) -> [Complex64; 4] {
    let (s, co) = (theta / 2.0).sin_cos();
    match kind {
        GateKind::X => [c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)],
        GateKind::Y => [c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)],
        GateKind::Z => [c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)],
        GateKind::RX => [c(co, 0.), c(0., -s), c(0., -s), c(co, 0.)],
        GateKind::RY => [c(co, 0.), c(-s, 0.), c(s, 0.), c(co, 0.)],
        GateKind::RZ => [c(co, -s), c(0., 0.), c(0., 0.), c(co, s)],
        GateKind::CNOT | GateKind::CZ => unreachable!("two-qubit kind"),
    }
}

/// Dense matrix of a gate kind: 2×2 for one-qubit kinds, 4×4 for CNOT/CZ
/// with the first wire (the control, for CNOT) as the high bit.
pub fn gate_matrix(kind: GateKind, angle: Option<f64>) -> Result<DenseMatrix> {
    check_angle(kind, angle)?;
    let one = c(1., 0.);
    let m = match kind {
        GateKind::CNOT => {
            let mut m = DenseMatrix::zeros(4);
            m.set(0, 0, one);
            m.set(1, 1, one);
            m.set(2, 3, one);
            m.set(3, 2, one);
            m
        }
        GateKind::CZ => {
            let mut m = DenseMatrix::identity(4);
            m.set(3, 3, -one);
            m
        }
        _ => DenseMatrix::from_rows(2, single_qubit_matrix(kind, angle.unwrap_or_default()).to_vec())?,
    };
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn assert_matrix(m: &DenseMatrix, expected: &[(f64, f64)]) {
        assert_eq!(m.data().len(), expected.len());
        for (got, &(re, im)) in m.data().iter().zip(expected) {
            assert!((got.re - re).abs() < 1e-15 && (got.im - im).abs() < 1e-15, "{got} vs {re}+{im}i");
        }
    }

    #[test]
    fn fixed_gates_match_textbook_matrices() {
        let o = (0.0, 0.0);
        let l = (1.0, 0.0);
        assert_matrix(&gate_matrix(GateKind::X, None).unwrap(), &[o, l, l, o]);
        assert_matrix(&gate_matrix(GateKind::Y, None).unwrap(), &[o, (0., -1.), (0., 1.), o]);
        assert_matrix(&gate_matrix(GateKind::Z, None).unwrap(), &[l, o, o, (-1., 0.)]);
        #[rustfmt::skip]
        let cnot = [l, o, o, o,  o, l, o, o,  o, o, o, l,  o, o, l, o];
        assert_matrix(&gate_matrix(GateKind::CNOT, None).unwrap(), &cnot);
        #[rustfmt::skip]
        let cz = [l, o, o, o,  o, l, o, o,  o, o, l, o,  o, o, o, (-1., 0.)];
        assert_matrix(&gate_matrix(GateKind::CZ, None).unwrap(), &cz);
    }

    #[test]
    fn rotation_special_values() {
        let id = gate_matrix(GateKind::RY, Some(0.0)).unwrap();
        assert_matrix(&id, &[(1., 0.), (0., 0.), (0., 0.), (1., 0.)]);
        let ry_pi = gate_matrix(GateKind::RY, Some(PI)).unwrap();
        for (got, want) in ry_pi.data().iter().zip([0.0, -1.0, 1.0, 0.0]) {
            assert!((got.re - want).abs() < 1e-15 && got.im.abs() < 1e-15);
        }
        // RX(π) = -iX, RZ(π) = -iZ
        let rx_pi = gate_matrix(GateKind::RX, Some(PI)).unwrap();
        assert!((rx_pi.get(0, 1) - c(0., -1.)).norm() < 1e-15);
        let rz_pi = gate_matrix(GateKind::RZ, Some(PI)).unwrap();
        assert!((rz_pi.get(0, 0) - c(0., -1.)).norm() < 1e-15);
        assert!((rz_pi.get(1, 1) - c(0., 1.)).norm() < 1e-15);
    }

    #[test]
    fn angle_presence_is_checked() {
        assert!(matches!(gate_matrix(GateKind::RX, None), Err(Error::Usage(_))));
        assert!(matches!(gate_matrix(GateKind::CZ, Some(0.1)), Err(Error::Usage(_))));
        assert!(matches!(GateOp::new(GateKind::X, Some(1.0), &[0]), Err(Error::Usage(_))));
        assert!(matches!(GateOp::new(GateKind::CNOT, None, &[0]), Err(Error::Usage(_))));
        assert_eq!(GateOp::new(GateKind::CNOT, None, &[2, 0]).unwrap(), GateOp::Cnot { control: 2, target: 0 });
    }

    #[test]
    fn rotations_are_unitary() {
        for kind in [GateKind::RX, GateKind::RY, GateKind::RZ] {
            for k in 0..20 {
                let m = gate_matrix(kind, Some(0.37 * k as f64 - 3.0)).unwrap();
                let prod = m.adjoint().matmul(&m).unwrap();
                assert!(prod.max_abs_diff(&DenseMatrix::identity(2)) < 1e-14);
            }
        }
    }
}
