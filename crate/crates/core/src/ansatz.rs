//! Angle encoding and the convolution/pooling variational circuit.
//!
//! Each stage applies [`CONV_REPEATS`] convolution layers over the active
//! qubits, then a pooling layer. A convolution layer places a three-parameter
//! [`Gate::Block`] on every circularly adjacent pair of active qubits, even
//! pairs first, then odd pairs. Pooling pairs active qubits `(2i, 2i+1)`,
//! applies a parameterized `CRZ` from the odd (discarded) qubit onto the even
//! (kept) one, and drops the discarded qubit from the active set.
//!
//! | qubits | parameters |
//! |--------|-----------|
//! | 2      | 7         |
//! | 4      | 33        |
//! | 8      | 85        |

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::sim::{Angle, Circuit, Gate, StateVector};

pub const CONV_REPEATS: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EncodingKind {
    Angle,
}

/// Feature `x ∈ [0, 1]` on qubit `i` becomes `RY(scale · x)` on qubit `i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EncodingSpec {
    pub kind: EncodingKind,
    pub scale: f64,
}

impl Default for EncodingSpec {
    fn default() -> Self {
        EncodingSpec {
            kind: EncodingKind::Angle,
            scale: PI,
        }
    }
}

impl EncodingSpec {
    pub fn angle(scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Config(format!("encoding scale must be positive, got {scale}")));
        }
        Ok(EncodingSpec {
            kind: EncodingKind::Angle,
            scale,
        })
    }
}

pub fn encode(features: &[f64], spec: &EncodingSpec, n_qubits: usize) -> Result<Vec<Gate>> {
    if features.len() != n_qubits {
        return Err(Error::DimensionMismatch {
            expected: n_qubits,
            actual: features.len(),
        });
    }
    features
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::FeatureOutOfRange { index: i, value: x });
            }
            Ok(Gate::Ry(i, Angle::Fixed(spec.scale * x)))
        })
        .collect()
}

/// Product state produced by the encoding layer alone.
pub fn encoded_state(features: &[f64], spec: &EncodingSpec) -> Result<StateVector> {
    let n = features.len();
    let mut state = StateVector::zero(n);
    for gate in encode(features, spec, n)? {
        state.apply(&gate, &[])?;
    }
    Ok(state)
}

/// A variational circuit together with the qubits it is read out from.
#[derive(Clone, Debug, PartialEq)]
pub struct AnsatzSpec {
    pub n_qubits: usize,
    pub circuit: Circuit,
    /// Qubits still active after the last pooling layer, in ascending order.
    /// For the single-readout classifier this has exactly one element.
    pub active: Vec<usize>,
}

impl AnsatzSpec {
    pub fn n_params(&self) -> usize {
        self.circuit.n_params()
    }

    /// The designated single readout qubit.
    pub fn readout(&self) -> usize {
        self.active[0]
    }
}

fn conv_pairs(active: &[usize]) -> Vec<(usize, usize)> {
    let m = active.len();
    if m == 2 {
        return vec![(active[0], active[1])];
    }
    let even = (0..m / 2).map(|i| (active[2 * i], active[2 * i + 1]));
    let odd = (0..m / 2).map(|i| (active[2 * i + 1], active[(2 * i + 2) % m]));
    let mut pairs: Vec<_> = even.chain(odd).collect();
    if m % 2 == 1 {
        // Odd register: the last qubit has no even partner; close the ring.
        pairs.push((active[m - 1], active[0]));
    }
    pairs
}

/// Convolution/pooling circuit that pools until at most `min_active` qubits
/// would remain; `min_active = 1` yields the single-readout ansatz.
pub fn build_qcnn_truncated(n_qubits: usize, min_active: usize) -> Result<AnsatzSpec> {
    if n_qubits < 2 {
        return Err(Error::Config(format!(
            "the convolutional ansatz needs at least 2 qubits, got {n_qubits}"
        )));
    }
    if min_active == 0 || min_active > n_qubits {
        return Err(Error::Config(format!(
            "cannot keep {min_active} of {n_qubits} qubits active"
        )));
    }
    let mut circuit = Circuit::new(n_qubits);
    let mut active: Vec<usize> = (0..n_qubits).collect();
    while active.len() > 1 && active.len().div_ceil(2) >= min_active {
        for _ in 0..CONV_REPEATS {
            for (control, target) in conv_pairs(&active) {
                let angles = [circuit.param(), circuit.param(), circuit.param()];
                circuit.push(Gate::Block {
                    control,
                    target,
                    angles,
                })?;
            }
        }
        let mut kept = Vec::with_capacity(active.len().div_ceil(2));
        for chunk in active.chunks(2) {
            if let [keep, discard] = *chunk {
                let angle = circuit.param();
                circuit.push(Gate::Crz {
                    control: discard,
                    target: keep,
                    angle,
                })?;
            }
            kept.push(chunk[0]);
        }
        active = kept;
    }
    Ok(AnsatzSpec {
        n_qubits,
        circuit,
        active,
    })
}

/// Single-readout convolution/pooling ansatz.
pub fn build_qcnn(n_qubits: usize) -> Result<AnsatzSpec> {
    build_qcnn_truncated(n_qubits, 1)
}

/// Encoding gates followed by the ansatz, as one circuit sharing the ansatz
/// parameter vector.
pub fn full_circuit(features: &[f64], encoding: &EncodingSpec, ansatz: &AnsatzSpec) -> Result<Circuit> {
    let mut circuit = Circuit::with_params(ansatz.n_qubits, ansatz.n_params());
    circuit.extend(encode(features, encoding, ansatz.n_qubits)?)?;
    circuit.extend(ansatz.circuit.ops().iter().cloned())?;
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{expectation_z, run_circuit};

    #[test]
    fn encoding_examples() {
        let spec = EncodingSpec::default();
        for (x, z) in [(0.0, 1.0), (1.0, -1.0), (0.5, 0.0)] {
            let state = encoded_state(&[x], &spec).unwrap();
            assert!((expectation_z(&state, 0).unwrap() - z).abs() < 1e-12);
        }
    }

    #[test]
    fn encoding_errors() {
        let spec = EncodingSpec::default();
        assert!(matches!(
            encode(&[0.1, 0.2], &spec, 3),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            encode(&[0.1, 1.2], &spec, 2),
            Err(Error::FeatureOutOfRange { index: 1, .. })
        ));
        assert!(EncodingSpec::angle(0.0).is_err());
    }

    #[test]
    fn parameter_counts() {
        assert_eq!(build_qcnn(2).unwrap().n_params(), 7);
        assert_eq!(build_qcnn(4).unwrap().n_params(), 33);
        assert_eq!(build_qcnn(8).unwrap().n_params(), 85);
        assert!(build_qcnn(1).is_err());
    }

    #[test]
    fn counts_near_published_targets() {
        let within = |n: usize, target: f64| (n as f64 - target).abs() <= 0.25 * target;
        assert!(within(build_qcnn(4).unwrap().n_params(), 39.0));
        assert!(within(build_qcnn(8).unwrap().n_params(), 91.0));
    }

    #[test]
    fn deterministic_single_readout() {
        for n in [2, 4, 8] {
            let a = build_qcnn(n).unwrap();
            let b = build_qcnn(n).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.active, vec![0]);
            assert_eq!(a.readout(), 0);
        }
    }

    #[test]
    fn truncated_keeps_enough_qubits() {
        let a = build_qcnn_truncated(8, 3).unwrap();
        assert_eq!(a.active, vec![0, 2, 4, 6]);
        let a = build_qcnn_truncated(8, 5).unwrap();
        assert_eq!(a.active.len(), 8);
        assert_eq!(a.n_params(), 0);
        let a = build_qcnn_truncated(8, 2).unwrap();
        assert_eq!(a.active, vec![0, 4]);
    }

    #[test]
    fn full_circuit_prepends_encoding() {
        let ansatz = build_qcnn(4).unwrap();
        let enc = EncodingSpec::default();
        let features = [0.1, 0.4, 0.7, 1.0];
        let circuit = full_circuit(&features, &enc, &ansatz).unwrap();
        assert_eq!(circuit.len(), 4 + ansatz.circuit.len());
        assert_eq!(circuit.n_params(), ansatz.n_params());
        let params: Vec<f64> = (0..ansatz.n_params()).map(|i| 0.1 * i as f64).collect();
        let direct = run_circuit(&circuit, &params, &StateVector::zero(4)).unwrap();
        let staged = run_circuit(&ansatz.circuit, &params, &encoded_state(&features, &enc).unwrap()).unwrap();
        assert_eq!(direct, staged);
        assert!(full_circuit(&features[..3], &enc, &ansatz).is_err());
    }
}
