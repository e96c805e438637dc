//! Batched evaluation of the encoded circuit for many inputs.
//!
//! Encoding does not depend on the trainable parameters, so in the noiseless
//! modes each input's encoded product state is computed once and reused for
//! every objective evaluation. Under noise the encoding gates are noisy too,
//! so the whole circuit is evolved from `|0…0⟩`.
//!
//! Per-instance results are collected in input order whatever the
//! scheduling, so reductions over a batch are reproducible.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::ansatz::{encoded_state, full_circuit, AnsatzSpec, EncodingSpec};
use crate::error::Result;
use crate::seed;
use crate::sim::{self, evolve_density, Circuit, DensityMatrix, StateVector};
use crate::tomography::{readout_bloch, BlochVector, ReadoutMode};

/// An input ready for repeated circuit evaluation.
#[derive(Clone, Debug)]
pub struct PreparedInput {
    state: StateVector,
    /// Full circuit (encoding + ansatz) when running from `|0…0⟩`.
    circuit: Option<Circuit>,
    seed_index: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct Readout<'a> {
    pub ansatz: &'a AnsatzSpec,
    pub encoding: &'a EncodingSpec,
    pub mode: ReadoutMode,
}

fn map_ordered<T, U, F>(items: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

impl<'a> Readout<'a> {
    pub fn new(ansatz: &'a AnsatzSpec, encoding: &'a EncodingSpec, mode: ReadoutMode) -> Self {
        Readout { ansatz, encoding, mode }
    }

    fn instance_mode(&self, index: usize) -> ReadoutMode {
        match self.mode {
            ReadoutMode::Exact => ReadoutMode::Exact,
            ReadoutMode::Shots { seed, .. } | ReadoutMode::Noisy { seed, .. } => {
                self.mode.reseeded(seed::derive_indexed(seed, "instance", index))
            }
        }
    }

    pub fn prepare_one(&self, features: &[f64], seed_index: usize) -> Result<PreparedInput> {
        if self.mode.is_noisy() {
            Ok(PreparedInput {
                state: StateVector::zero(self.ansatz.n_qubits),
                circuit: Some(full_circuit(features, self.encoding, self.ansatz)?),
                seed_index,
            })
        } else {
            // Validates length and range the same way the full circuit would.
            crate::ansatz::encode(features, self.encoding, self.ansatz.n_qubits)?;
            Ok(PreparedInput {
                state: encoded_state(features, self.encoding)?,
                circuit: None,
                seed_index,
            })
        }
    }

    pub fn prepare<F: AsRef<[f64]>>(&self, rows: &[F]) -> Result<Vec<PreparedInput>> {
        rows.iter()
            .enumerate()
            .map(|(i, r)| self.prepare_one(r.as_ref(), i))
            .collect()
    }

    fn circuit_for<'c>(&'c self, input: &'c PreparedInput) -> &'c Circuit {
        input.circuit.as_ref().unwrap_or(&self.ansatz.circuit)
    }

    /// Tomographic Bloch vector of the readout qubit for one prepared input.
    pub fn bloch(&self, params: &[f64], input: &PreparedInput) -> Result<BlochVector> {
        readout_bloch(
            self.circuit_for(input),
            params,
            &input.state,
            self.ansatz.readout(),
            &self.instance_mode(input.seed_index),
        )
    }

    pub fn bloch_batch(&self, params: &[f64], inputs: &[PreparedInput]) -> Result<Vec<BlochVector>> {
        map_ordered(inputs, |input| self.bloch(params, input))
    }

    /// `⟨σz⟩` of each listed qubit, measured in the native basis only.
    pub fn z_expectations(&self, params: &[f64], input: &PreparedInput, qubits: &[usize]) -> Result<Vec<f64>> {
        let circuit = self.circuit_for(input);
        match self.instance_mode(input.seed_index) {
            ReadoutMode::Exact => {
                let out = sim::run_circuit(circuit, params, &input.state)?;
                qubits.iter().map(|&q| sim::expectation_z(&out, q)).collect()
            }
            ReadoutMode::Shots { shots, seed } => {
                let out = sim::run_circuit(circuit, params, &input.state)?;
                qubits
                    .iter()
                    .map(|&q| sim::sample_expectation_z(&out, q, shots, seed::derive_indexed(seed, "z", q)))
                    .collect()
            }
            ReadoutMode::Noisy { noise, shots, seed } => {
                let rho = evolve_density(circuit, params, &DensityMatrix::from_pure(&input.state), &noise)?;
                qubits
                    .iter()
                    .map(|&q| {
                        let z = sim::expectation_z_density(&rho, q, &noise)?;
                        match shots {
                            None => Ok(z),
                            Some(n) => sim::sample_pm1_mean((1.0 + z) / 2.0, n, seed::derive_indexed(seed, "z", q)),
                        }
                    })
                    .collect()
            }
        }
    }

    pub fn z_batch(&self, params: &[f64], inputs: &[PreparedInput], qubits: &[usize]) -> Result<Vec<Vec<f64>>> {
        map_ordered(inputs, |input| self.z_expectations(params, input, qubits))
    }
}
