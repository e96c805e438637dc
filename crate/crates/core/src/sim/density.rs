use num_complex::Complex64;

use super::circuit::Circuit;
use super::gate::{Backend, Gate};
use super::kernel::{self, Mat2};
use super::state::StateVector;
use crate::error::{Error, Result};

/// Error rates of the synthetic noise model: depolarizing after every one- and
/// two-qubit gate, and a classical bit flip on readout.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NoiseSpec {
    pub p_depol_1q: f64,
    pub p_depol_2q: f64,
    pub p_meas_flip: f64,
}

impl NoiseSpec {
    pub fn new(p_depol_1q: f64, p_depol_2q: f64, p_meas_flip: f64) -> Result<Self> {
        let spec = NoiseSpec {
            p_depol_1q,
            p_depol_2q,
            p_meas_flip,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("p_depol_1q", self.p_depol_1q),
            ("p_depol_2q", self.p_depol_2q),
            ("p_meas_flip", self.p_meas_flip),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidProbability { name, value });
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.p_depol_1q == 0.0 && self.p_depol_2q == 0.0 && self.p_meas_flip == 0.0
    }
}

/// Mixed state of `n_qubits` qubits stored row-major; entry `(r, c)` lives at
/// `r * 2^n + c`, so column bits are the low `n` bits of the flat index and
/// row bits the high `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn zero(n_qubits: usize) -> Self {
        Self::from_pure(&StateVector::zero(n_qubits))
    }

    /// `|ψ⟩⟨ψ|`
    pub fn from_pure(state: &StateVector) -> Self {
        let amps = state.amplitudes();
        let dim = amps.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                entries.push(amps[r] * amps[c].conj());
            }
        }
        DensityMatrix {
            n_qubits: state.n_qubits(),
            entries,
        }
    }

    /// Wraps raw entries without checking positivity; used for tomographic
    /// reconstructions, which may fall slightly outside the Bloch ball.
    pub fn from_entries_unchecked(n_qubits: usize, entries: Vec<Complex64>) -> Self {
        assert_eq!(entries.len(), 1 << (2 * n_qubits));
        DensityMatrix { n_qubits, entries }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim() + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.entry(i, i)).sum()
    }

    /// Largest `|ρ - ρ†|` entry.
    pub fn hermiticity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in r..dim {
                worst = worst.max((self.entry(r, c) - self.entry(c, r).conj()).norm());
            }
        }
        worst
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

    /// Noiseless `UρU†` for one gate.
    pub fn apply(&mut self, gate: &Gate, params: &[f64]) -> Result<()> {
        self.apply_noisy(gate, params, &NoiseSpec::default())
    }

    pub fn apply_noisy(&mut self, gate: &Gate, params: &[f64], noise: &NoiseSpec) -> Result<()> {
        for q in gate.qubits() {
            self.check_qubit(q)?;
        }
        gate.lower(&mut Noisy { rho: self, noise }, params)
    }

    /// Replaces the reduced state on `qubits` by the maximally mixed state with
    /// probability `p`: `ρ → (1-p)ρ + p · I/d ⊗ Tr_qubits ρ`.
    pub fn depolarize(&mut self, qubits: &[usize], p: f64) {
        if p == 0.0 {
            return;
        }
        let dim = self.dim();
        let mask = qubits.iter().fold(0usize, |m, &q| m | (1 << q));
        let subsets: Vec<usize> = (0..dim).filter(|m| m & !mask == 0).collect();
        let d = subsets.len() as f64;
        let mut block = vec![Complex64::new(0.0, 0.0); subsets.len() * subsets.len()];
        for rb in (0..dim).filter(|r| r & mask == 0) {
            for cb in (0..dim).filter(|c| c & mask == 0) {
                let mut tr = Complex64::new(0.0, 0.0);
                for (a, &mr) in subsets.iter().enumerate() {
                    for (b, &mc) in subsets.iter().enumerate() {
                        let v = self.entries[(rb | mr) * dim + (cb | mc)];
                        block[a * subsets.len() + b] = v;
                        if a == b {
                            tr += v;
                        }
                    }
                }
                for (a, &mr) in subsets.iter().enumerate() {
                    for (b, &mc) in subsets.iter().enumerate() {
                        let mut v = block[a * subsets.len() + b] * (1.0 - p);
                        if a == b {
                            v += tr * (p / d);
                        }
                        self.entries[(rb | mr) * dim + (cb | mc)] = v;
                    }
                }
            }
        }
    }

    /// `Tr(σz ρ)` on the marginal of `qubit`, without readout error.
    pub fn z_marginal(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let mask = 1usize << qubit;
        let z: f64 = (0..self.dim())
            .map(|i| {
                let p = self.entry(i, i).re;
                if i & mask == 0 {
                    p
                } else {
                    -p
                }
            })
            .sum();
        Ok(z)
    }
}

struct Noisy<'a> {
    rho: &'a mut DensityMatrix,
    noise: &'a NoiseSpec,
}

impl Backend for Noisy<'_> {
    fn one_qubit(&mut self, qubit: usize, m: &Mat2) {
        let n = self.rho.n_qubits;
        kernel::apply_1q(&mut self.rho.entries, qubit + n, m);
        kernel::apply_1q(&mut self.rho.entries, qubit, &kernel::conj(m));
        self.rho.depolarize(&[qubit], self.noise.p_depol_1q);
    }

    fn cnot(&mut self, control: usize, target: usize) {
        let n = self.rho.n_qubits;
        kernel::apply_cnot(&mut self.rho.entries, control + n, target + n);
        kernel::apply_cnot(&mut self.rho.entries, control, target);
        self.rho.depolarize(&[control, target], self.noise.p_depol_2q);
    }

    fn controlled(&mut self, control: usize, target: usize, m: &Mat2) {
        let n = self.rho.n_qubits;
        kernel::apply_controlled_1q(&mut self.rho.entries, control + n, target + n, m);
        kernel::apply_controlled_1q(&mut self.rho.entries, control, target, &kernel::conj(m));
        self.rho.depolarize(&[control, target], self.noise.p_depol_2q);
    }
}

/// Evolves `input` through `circuit`, following each one-qubit (two-qubit)
/// primitive with a depolarizing channel of strength `p_depol_1q`
/// (`p_depol_2q`) on the qubits it touched.
pub fn evolve_density(
    circuit: &Circuit,
    params: &[f64],
    input: &DensityMatrix,
    noise: &NoiseSpec,
) -> Result<DensityMatrix> {
    circuit.check_params(params)?;
    noise.validate()?;
    if input.n_qubits != circuit.n_qubits() {
        return Err(Error::StateDimension {
            expected: 1 << circuit.n_qubits(),
            actual: input.dim(),
        });
    }
    let mut rho = input.clone();
    for gate in circuit.ops() {
        gate.lower(&mut Noisy { rho: &mut rho, noise }, params)?;
    }
    Ok(rho)
}

/// `⟨σz⟩` on `qubit` as seen through a readout that flips with probability
/// `p_meas_flip`: `(1 - 2 p_meas_flip) · Tr(σz ρ)`.
pub fn expectation_z_density(rho: &DensityMatrix, qubit: usize, noise: &NoiseSpec) -> Result<f64> {
    noise.validate()?;
    Ok((1.0 - 2.0 * noise.p_meas_flip) * rho.z_marginal(qubit)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{expectation_z, run_circuit};

    fn bloch_x(rho: &DensityMatrix) -> f64 {
        // Tr(σx ρ) on a single qubit.
        2.0 * rho.entry(0, 1).re
    }

    #[test]
    fn noiseless_matches_pure_evolution() {
        let mut circuit = Circuit::new(2);
        let a = circuit.param();
        let b = circuit.param();
        circuit
            .extend([
                Gate::H(0),
                Gate::Ry(1, a),
                Gate::Crz {
                    control: 0,
                    target: 1,
                    angle: b,
                },
                Gate::Sdg(1),
            ])
            .unwrap();
        let params = [0.7, -1.3];
        let psi = run_circuit(&circuit, &params, &StateVector::zero(2)).unwrap();
        let rho = evolve_density(&circuit, &params, &DensityMatrix::zero(2), &NoiseSpec::default()).unwrap();
        let expected = DensityMatrix::from_pure(&psi);
        for (x, y) in rho.entries().iter().zip(expected.entries()) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn full_depolarization_gives_maximally_mixed() {
        let mut circuit = Circuit::new(1);
        circuit.push(Gate::X(0)).unwrap();
        let noise = NoiseSpec::new(1.0, 0.0, 0.0).unwrap();
        let rho = evolve_density(&circuit, &[], &DensityMatrix::zero(1), &noise).unwrap();
        assert!((rho.entry(0, 0).re - 0.5).abs() < 1e-12);
        assert!((rho.entry(1, 1).re - 0.5).abs() < 1e-12);
        assert!(rho.entry(0, 1).norm() < 1e-12);
    }

    #[test]
    fn depolarizing_shrinks_bloch_vector() {
        let mut circuit = Circuit::new(1);
        circuit.push(Gate::H(0)).unwrap();
        let noise = NoiseSpec::new(0.1, 0.0, 0.0).unwrap();
        let rho = evolve_density(&circuit, &[], &DensityMatrix::zero(1), &noise).unwrap();
        assert!((bloch_x(&rho) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn two_qubit_depolarizing_preserves_trace() {
        let mut circuit = Circuit::new(3);
        let t = circuit.param();
        circuit
            .extend([
                Gate::H(0),
                Gate::Cnot { control: 0, target: 2 },
                Gate::Crz {
                    control: 2,
                    target: 1,
                    angle: t,
                },
            ])
            .unwrap();
        let noise = NoiseSpec::new(0.05, 0.2, 0.0).unwrap();
        let rho = evolve_density(&circuit, &[0.4], &DensityMatrix::zero(3), &noise).unwrap();
        assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(rho.hermiticity_error() < 1e-12);
    }

    #[test]
    fn measurement_flip() {
        let zero = DensityMatrix::zero(1);
        let clean = NoiseSpec::default();
        assert_eq!(expectation_z_density(&zero, 0, &clean).unwrap(), 1.0);
        let random = NoiseSpec::new(0.0, 0.0, 0.5).unwrap();
        assert_eq!(expectation_z_density(&zero, 0, &random).unwrap(), 0.0);
        let mut mixed = DensityMatrix::zero(1);
        mixed.depolarize(&[0], 1.0);
        for flip in [0.0, 0.1, 0.5] {
            let noise = NoiseSpec::new(0.0, 0.0, flip).unwrap();
            assert!(expectation_z_density(&mixed, 0, &noise).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn z_consistency_with_statevector() {
        let mut circuit = Circuit::new(2);
        let a = circuit.param();
        circuit
            .extend([Gate::Ry(0, a), Gate::Cnot { control: 0, target: 1 }])
            .unwrap();
        let psi = run_circuit(&circuit, &[1.1], &StateVector::zero(2)).unwrap();
        let rho = evolve_density(&circuit, &[1.1], &DensityMatrix::zero(2), &NoiseSpec::default()).unwrap();
        for q in 0..2 {
            let a = expectation_z(&psi, q).unwrap();
            let b = expectation_z_density(&rho, q, &NoiseSpec::default()).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_noise_rejected() {
        assert!(NoiseSpec::new(1.5, 0.0, 0.0).is_err());
        assert!(NoiseSpec::new(0.0, -0.1, 0.0).is_err());
        let circuit = Circuit::new(1);
        let bad = NoiseSpec {
            p_depol_1q: 0.0,
            p_depol_2q: 0.0,
            p_meas_flip: 2.0,
        };
        assert!(evolve_density(&circuit, &[], &DensityMatrix::zero(1), &bad).is_err());
    }
}
