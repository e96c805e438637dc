//! Three-basis tomography of a single readout qubit.
//!
//! The readout is measured natively in the z basis only. To obtain `⟨σx⟩` an
//! `H` is inserted before the measurement; for `⟨σy⟩` an `S†` followed by `H`.
//! Each basis is a separate execution of the circuit.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::seed;
use crate::sim::{
    self, evolve_density, expectation_z, expectation_z_density, Circuit, DensityMatrix, Gate, NoiseSpec, StateVector,
};

/// `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` of one qubit.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BlochVector {
    pub rx: f64,
    pub ry: f64,
    pub rz: f64,
}

impl BlochVector {
    pub const fn new(rx: f64, ry: f64, rz: f64) -> Self {
        BlochVector { rx, ry, rz }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.rx, self.ry, self.rz]
    }

    pub fn dot(self, other: BlochVector) -> f64 {
        self.rx * other.rx + self.ry * other.ry + self.rz * other.rz
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, k: f64) -> BlochVector {
        BlochVector::new(self.rx * k, self.ry * k, self.rz * k)
    }

    pub fn normalized(self) -> Option<BlochVector> {
        let n = self.norm();
        (n > 1e-9).then(|| self.scale(1.0 / n))
    }

    /// Bloch vector of a pure single-qubit state `α|0⟩ + β|1⟩`.
    pub fn from_amplitudes(alpha: Complex64, beta: Complex64) -> Self {
        let cross = alpha.conj() * beta;
        BlochVector::new(2.0 * cross.re, 2.0 * cross.im, alpha.norm_sqr() - beta.norm_sqr())
    }
}

impl std::ops::Add for BlochVector {
    type Output = BlochVector;

    fn add(self, o: BlochVector) -> BlochVector {
        BlochVector::new(self.rx + o.rx, self.ry + o.ry, self.rz + o.rz)
    }
}

impl fmt::Display for BlochVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:+.6}, {:+.6}, {:+.6})", self.rx, self.ry, self.rz)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];
}

/// Gates that rotate `basis` onto the z axis of `qubit`.
pub fn basis_change_ops(basis: Basis, qubit: usize) -> Vec<Gate> {
    match basis {
        Basis::X => vec![Gate::H(qubit)],
        Basis::Y => vec![Gate::Sdg(qubit), Gate::H(qubit)],
        Basis::Z => Vec::new(),
    }
}

/// How expectation values are obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReadoutMode {
    /// Exact probabilities from the statevector.
    Exact,
    /// `shots` samples per basis from the statevector.
    Shots { shots: u32, seed: u64 },
    /// Density-matrix evolution under `noise`; exact probabilities when
    /// `shots` is `None`.
    Noisy {
        noise: NoiseSpec,
        shots: Option<u32>,
        seed: u64,
    },
}

impl ReadoutMode {
    /// Same mode with its sampling seed replaced.
    pub fn reseeded(self, new_seed: u64) -> Self {
        match self {
            ReadoutMode::Exact => ReadoutMode::Exact,
            ReadoutMode::Shots { shots, .. } => ReadoutMode::Shots { shots, seed: new_seed },
            ReadoutMode::Noisy { noise, shots, .. } => ReadoutMode::Noisy {
                noise,
                shots,
                seed: new_seed,
            },
        }
    }

    pub fn is_noisy(&self) -> bool {
        matches!(self, ReadoutMode::Noisy { noise, .. } if !noise.is_zero())
    }
}

fn basis_seed(seed: u64, basis: Basis) -> u64 {
    seed::derive(seed, &format!("basis/{basis:?}"))
}

/// Measures `⟨σ⟩` of the readout along `basis`: appends the basis change,
/// then measures z.
fn measure_basis(prepared: &Prepared, readout: usize, basis: Basis, mode: &ReadoutMode) -> Result<f64> {
    let ops = basis_change_ops(basis, readout);
    match (prepared, mode) {
        (Prepared::Pure(state), ReadoutMode::Exact) => {
            let mut s = state.clone();
            for op in &ops {
                s.apply(op, &[])?;
            }
            expectation_z(&s, readout)
        }
        (Prepared::Pure(state), ReadoutMode::Shots { shots, seed }) => {
            let mut s = state.clone();
            for op in &ops {
                s.apply(op, &[])?;
            }
            sim::sample_expectation_z(&s, readout, *shots, basis_seed(*seed, basis))
        }
        (Prepared::Mixed(rho), ReadoutMode::Noisy { noise, shots, seed }) => {
            let mut r = rho.clone();
            for op in &ops {
                r.apply_noisy(op, &[], noise)?;
            }
            let z = expectation_z_density(&r, readout, noise)?;
            match shots {
                None => Ok(z),
                Some(n) => sim::sample_pm1_mean((1.0 + z) / 2.0, *n, basis_seed(*seed, basis)),
            }
        }
        _ => unreachable!("prepared state kind always matches the mode"),
    }
}

enum Prepared {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

/// Runs `circuit` on `input` once per measurement basis and returns the
/// readout qubit's Bloch vector.
///
/// The three executions share everything up to the basis change, so the
/// circuit body is simulated once and the three measurement units are
/// applied to copies of the result.
pub fn readout_bloch(
    circuit: &Circuit,
    params: &[f64],
    input: &StateVector,
    readout: usize,
    mode: &ReadoutMode,
) -> Result<BlochVector> {
    if readout >= circuit.n_qubits() {
        return Err(Error::QubitOutOfRange {
            index: readout,
            n_qubits: circuit.n_qubits(),
        });
    }
    let prepared = match mode {
        ReadoutMode::Exact | ReadoutMode::Shots { .. } => {
            if let ReadoutMode::Shots { shots: 0, .. } = mode {
                return Err(Error::ZeroShots);
            }
            Prepared::Pure(sim::run_circuit(circuit, params, input)?)
        }
        ReadoutMode::Noisy { noise, shots, .. } => {
            if *shots == Some(0) {
                return Err(Error::ZeroShots);
            }
            Prepared::Mixed(evolve_density(
                circuit,
                params,
                &DensityMatrix::from_pure(input),
                noise,
            )?)
        }
    };
    let [rx, ry, rz] = Basis::ALL.map(|b| measure_basis(&prepared, readout, b, mode));
    Ok(BlochVector::new(rx?, ry?, rz?))
}

/// `ρ = ½(I + rx σx + ry σy + rz σz)`.
pub fn reconstruct_density(b: BlochVector) -> DensityMatrix {
    let c = Complex64::new;
    DensityMatrix::from_entries_unchecked(
        1,
        vec![
            c((1.0 + b.rz) / 2.0, 0.0),
            c(b.rx / 2.0, -b.ry / 2.0),
            c(b.rx / 2.0, b.ry / 2.0),
            c((1.0 - b.rz) / 2.0, 0.0),
        ],
    )
}

/// Polar angle `θ ∈ [0, π]` and azimuth `φ ∈ [0, 2π)` of the Bloch vector,
/// with `θ = 0` at `|0⟩`.
pub fn bloch_angles(b: BlochVector) -> Result<(f64, f64)> {
    let n = b.norm();
    if n <= 1e-9 {
        return Err(Error::UndefinedDirection);
    }
    let theta = (b.rz / n).clamp(-1.0, 1.0).acos();
    let mut phi = b.ry.atan2(b.rx);
    if phi < 0.0 {
        phi += 2.0 * PI;
    }
    if phi >= 2.0 * PI {
        phi = 0.0;
    }
    Ok((theta, phi))
}
