use rand::Rng;

use super::state::Statevector;
use crate::error::{Error, Result};

impl Statevector {
    fn check_wire(&self, wire: usize) -> Result<()> {
        if wire >= self.num_qubits() {
            return Err(Error::domain(format!("wire {wire} out of range for {} qubit(s)", self.num_qubits())));
        }
        Ok(())
    }

    /// `⟨ψ|Z_wire|ψ⟩`: +1 weight for amplitudes whose `wire` bit is 0, −1
    /// otherwise.
    pub fn expectation_z(&self, wire: usize) -> Result<f64> {
        self.check_wire(wire)?;
        let mask = self.wire_mask(wire);
        let value: f64 =
            self.amps().iter().enumerate().map(|(i, a)| if i & mask == 0 { a.norm_sqr() } else { -a.norm_sqr() }).sum();
        Ok(value.clamp(-1.0, 1.0))
    }

    /// `⟨Z⟩` on every wire, in wire order.
    pub fn expectations_z(&self) -> Vec<f64> {
        (0..self.num_qubits()).map(|w| self.expectation_z(w).expect("wire in range")).collect()
    }

    /// Mean of `shots` independent ±1 outcomes of measuring Z on `wire`.
    ///
    /// Each wire is sampled from its own marginal; the state is not
    /// collapsed, so reading several wires never couples their outcomes.
    pub fn sample_z_mean<R: Rng + ?Sized>(&self, wire: usize, shots: u64, rng: &mut R) -> Result<f64> {
        if shots == 0 {
            return Err(Error::usage("shots must be at least 1"));
        }
        let p_plus = (1.0 + self.expectation_z(wire)?) / 2.0;
        let plus = (0..shots).filter(|_| rng.random::<f64>() < p_plus).count() as f64;
        let shots = shots as f64;
        Ok((2.0 * plus - shots) / shots)
    }
}
