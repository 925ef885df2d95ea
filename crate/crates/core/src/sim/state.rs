use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gate::{single_qubit_matrix, GateOp};
use crate::error::{Error, Result};

/// A single complex amplitude.
pub type Amp = Complex64;

/// Default cap on register width: 2^24 amplitudes is 256 MiB of `Complex64`.
pub const DEFAULT_MAX_QUBITS: usize = 24;

const AMP_BYTES: u128 = std::mem::size_of::<Amp>() as u128;

/// Pure state of `num_qubits` qubits as `2^num_qubits` amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amps: Vec<Amp>,
}

fn human_bytes(bytes: u128) -> String {
    const UNITS: [&str; 5] = ["B", "KiB", "MiB", "GiB", "TiB"];
    let mut value = bytes as f64;
    let mut unit = 0;
    while value >= 1024.0 && unit < UNITS.len() - 1 {
        value /= 1024.0;
        unit += 1;
    }
    format!("{value:.0} {}", UNITS[unit])
}

/// Checks a register width against `cap`, naming the memory the request
/// would need when it is refused.
pub(crate) fn check_width(num_qubits: usize, cap: usize) -> Result<()> {
    if num_qubits == 0 {
        return Err(Error::domain("a register needs at least one qubit"));
    }
    if num_qubits > cap {
        let bytes = 1u128.checked_shl(num_qubits as u32).unwrap_or(u128::MAX).saturating_mul(AMP_BYTES);
        return Err(Error::Resource(format!(
            "{num_qubits} qubits need 2^{num_qubits} amplitudes ({}); the cap is {cap} qubits",
            human_bytes(bytes)
        )));
    }
    Ok(())
}

impl Statevector {
    /// `|0…0⟩` on `num_qubits` wires, subject to [`DEFAULT_MAX_QUBITS`].
    pub fn zero_state(num_qubits: usize) -> Result<Self> {
        Self::zero_state_capped(num_qubits, DEFAULT_MAX_QUBITS)
    }

    pub fn zero_state_capped(num_qubits: usize, cap: usize) -> Result<Self> {
        check_width(num_qubits, cap)?;
        let mut amps = vec![Amp::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = Amp::new(1.0, 0.0);
        Ok(Self { num_qubits, amps })
    }

    /// Computational basis state `|index⟩` (big-endian bit pattern).
    pub fn basis_state(num_qubits: usize, index: usize) -> Result<Self> {
        check_width(num_qubits, DEFAULT_MAX_QUBITS)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::domain(format!(
                "basis index {index} out of range for {num_qubits} qubit(s) (dimension {dim})"
            )));
        }
        let mut amps = vec![Amp::new(0.0, 0.0); dim];
        amps[index] = Amp::new(1.0, 0.0);
        Ok(Self { num_qubits, amps })
    }

    /// Wraps explicit amplitudes. The length must be a power of two and the
    /// vector normalised within 1e-9.
    pub fn from_amplitudes(amps: Vec<Amp>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::domain(format!("amplitude count {len} is not 2^U with U >= 1")));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_width(num_qubits, DEFAULT_MAX_QUBITS)?;
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::domain("amplitudes must be finite"));
        }
        let state = Self { num_qubits, amps };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!("state is not normalised: |psi|^2 = {norm}")));
        }
        Ok(state)
    }

    pub(crate) fn from_raw(num_qubits: usize, amps: Vec<Amp>) -> Self {
        debug_assert_eq!(amps.len(), 1 << num_qubits);
        Self { num_qubits, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amps(&self) -> &[Amp] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Largest amplitude-wise distance to `other`.
    pub fn max_abs_diff(&self, other: &Statevector) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Index mask for `wire` under the big-endian convention.
    #[inline]
    pub(crate) fn wire_mask(&self, wire: usize) -> usize {
        1 << (self.num_qubits - 1 - wire)
    }

    /// Applies `gate` in place with a stride sweep over the amplitude pairs
    /// (or quadruples) it couples.
    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(self.num_qubits)?;
        match *gate {
            GateOp::X(w) => {
                let stride = self.wire_mask(w);
                for_each_pair(&mut self.amps, stride, std::mem::swap);
            }
            GateOp::Z(w) => {
                let stride = self.wire_mask(w);
                for_each_pair(&mut self.amps, stride, |_, b| *b = -*b);
            }
            GateOp::Rz(w, theta) => {
                let stride = self.wire_mask(w);
                let (s, c) = (theta / 2.0).sin_cos();
                let (p0, p1) = (Amp::new(c, -s), Amp::new(c, s));
                for_each_pair(&mut self.amps, stride, |a, b| {
                    *a *= p0;
                    *b *= p1;
                });
            }
            GateOp::Y(w) | GateOp::Rx(w, _) | GateOp::Ry(w, _) => {
                let stride = self.wire_mask(w);
                let [m00, m01, m10, m11] = single_qubit_matrix(gate.kind(), gate.angle().unwrap_or_default());
                for_each_pair(&mut self.amps, stride, |a, b| {
                    let (x, y) = (*a, *b);
                    *a = m00 * x + m01 * y;
                    *b = m10 * x + m11 * y;
                });
            }
            GateOp::Cnot { control, target } => {
                let cmask = self.wire_mask(control);
                let tmask = self.wire_mask(target);
                for i in 0..self.amps.len() {
                    if i & cmask != 0 && i & tmask == 0 {
                        self.amps.swap(i, i | tmask);
                    }
                }
            }
            GateOp::Cz(a, b) => {
                let both = self.wire_mask(a) | self.wire_mask(b);
                for (i, amp) in self.amps.iter_mut().enumerate() {
                    if i & both == both {
                        *amp = -*amp;
                    }
                }
            }
        }
        Ok(())
    }

    /// Value-returning form of [`apply`](Self::apply).
    pub fn apply_gate(mut self, gate: &GateOp) -> Result<Self> {
        self.apply(gate)?;
        Ok(self)
    }

    /// Applies a sequence of gates in order.
    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a GateOp>) -> Result<()> {
        gates.into_iter().try_for_each(|g| self.apply(g))
    }

    pub fn dump(&self) -> StateDump {
        StateDump { num_qubits: self.num_qubits, amps: self.amps.iter().map(|a| [a.re, a.im]).collect() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.dump()).expect("state dump serializes")
    }
}

/// Calls `f(a_i, a_j)` for every index pair `(i, i + stride)` whose `stride`
/// bit is clear in `i`.
#[inline]
fn for_each_pair(amps: &mut [Amp], stride: usize, mut f: impl FnMut(&mut Amp, &mut Amp)) {
    for block in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            f(a, b);
        }
    }
}

/// Debug JSON form: `{"num_qubits": U, "amps": [[re, im], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDump {
    pub num_qubits: usize,
    pub amps: Vec<[f64; 2]>,
}

impl TryFrom<StateDump> for Statevector {
    type Error = Error;

    fn try_from(dump: StateDump) -> Result<Self> {
        let amps: Vec<Amp> = dump.amps.iter().map(|&[re, im]| Amp::new(re, im)).collect();
        let state = Statevector::from_amplitudes(amps)?;
        if state.num_qubits != dump.num_qubits {
            return Err(Error::domain(format!(
                "num_qubits {} disagrees with {} amplitudes",
                dump.num_qubits,
                state.amps.len()
            )));
        }
        Ok(state)
    }
}
