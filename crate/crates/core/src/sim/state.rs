use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use super::circuit::Circuit;
use super::gate::{Backend, Gate};
use super::kernel::{self, Mat2};
use crate::error::{Error, Result};

const NORM_TOLERANCE: f64 = 1e-9;

/// Pure state of `n_qubits` qubits. Qubit 0 is the least-significant bit of
/// the basis-state index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`
    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        assert!(n_qubits > 0 && index < 1 << n_qubits);
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        StateVector { n_qubits, amps }
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << n_qubits {
            return Err(Error::StateDimension {
                expected: 1 << n_qubits,
                actual: amps.len(),
            });
        }
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm_sqr));
        }
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    /// Applies one gate in place.
    pub fn apply(&mut self, gate: &Gate, params: &[f64]) -> Result<()> {
        for q in gate.qubits() {
            self.check_qubit(q)?;
        }
        gate.lower(self, params)
    }

    /// Probability of reading `1` on `qubit`.
    pub fn probability_one(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let mask = 1usize << qubit;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }
}

impl Backend for StateVector {
    fn one_qubit(&mut self, qubit: usize, m: &Mat2) {
        kernel::apply_1q(&mut self.amps, qubit, m);
    }

    fn cnot(&mut self, control: usize, target: usize) {
        kernel::apply_cnot(&mut self.amps, control, target);
    }

    fn controlled(&mut self, control: usize, target: usize, m: &Mat2) {
        kernel::apply_controlled_1q(&mut self.amps, control, target, m);
    }
}

pub fn apply_gate(state: &StateVector, gate: &Gate, params: &[f64]) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply(gate, params)?;
    Ok(out)
}

/// Runs every gate of `circuit` on a copy of `input`.
pub fn run_circuit(circuit: &Circuit, params: &[f64], input: &StateVector) -> Result<StateVector> {
    circuit.check_params(params)?;
    if input.n_qubits != circuit.n_qubits() {
        return Err(Error::StateDimension {
            expected: 1 << circuit.n_qubits(),
            actual: input.amps.len(),
        });
    }
    let mut state = input.clone();
    for gate in circuit.ops() {
        gate.lower(&mut state, params)?;
    }
    Ok(state)
}

/// Exact `⟨σz⟩` on `qubit`.
pub fn expectation_z(state: &StateVector, qubit: usize) -> Result<f64> {
    let p1 = state.probability_one(qubit)?;
    Ok((1.0 - 2.0 * p1).clamp(-1.0, 1.0))
}

/// Mean of `shots` independent ±1 outcomes drawn with `P(+1) = p_plus`.
pub(crate) fn sample_pm1_mean(p_plus: f64, shots: u32, seed: u64) -> Result<f64> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let p = p_plus.clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plus = Binomial::new(u64::from(shots), p)
        .expect("probability clamped to [0, 1]")
        .sample(&mut rng);
    Ok((2.0 * plus as f64 - f64::from(shots)) / f64::from(shots))
}

/// Finite-shot estimate of `⟨σz⟩` on `qubit`; deterministic for a given seed.
pub fn sample_expectation_z(state: &StateVector, qubit: usize, shots: u32, seed: u64) -> Result<f64> {
    let p1 = state.probability_one(qubit)?;
    sample_pm1_mean(1.0 - p1, shots, seed)
}
