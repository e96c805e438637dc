//! Dense statevector and density-matrix simulation.

mod circuit;
mod density;
mod gate;
pub(crate) mod kernel;
mod state;

pub use circuit::Circuit;
pub use density::{evolve_density, expectation_z_density, DensityMatrix, NoiseSpec};
pub use gate::{Angle, Gate};
pub use state::{apply_gate, expectation_z, run_circuit, sample_expectation_z, StateVector};

pub(crate) use state::sample_pm1_mean;
