use std::fmt;

use super::kernel::{self, Mat2};
use crate::error::{Error, Result};

/// Rotation angle of a parameterized gate: either a slot in the shared
/// parameter vector or a constant in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Angle {
    Param(usize),
    Fixed(f64),
}

impl Angle {
    pub fn resolve(self, params: &[f64]) -> Result<f64> {
        match self {
            Angle::Fixed(theta) => Ok(theta),
            Angle::Param(slot) => params.get(slot).copied().ok_or(Error::MissingParameter {
                slot,
                n_params: params.len(),
            }),
        }
    }

    pub fn slot(self) -> Option<usize> {
        match self {
            Angle::Param(slot) => Some(slot),
            Angle::Fixed(_) => None,
        }
    }
}

/// One operation of a circuit.
///
/// `Block` is the three-parameter entangling primitive used by the
/// convolution layers: `RY(a)` on the control and `RY(b)` on the target,
/// then `CNOT(control, target)`, then `RY(c)` on the target.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    X(usize),
    Y(usize),
    Z(usize),
    H(usize),
    S(usize),
    Sdg(usize),
    Rx(usize, Angle),
    Ry(usize, Angle),
    Rz(usize, Angle),
    Cnot {
        control: usize,
        target: usize,
    },
    Crz {
        control: usize,
        target: usize,
        angle: Angle,
    },
    Block {
        control: usize,
        target: usize,
        angles: [Angle; 3],
    },
}

/// Receiver of lowered gate primitives. Implemented by the statevector and
/// density-matrix backends.
pub(crate) trait Backend {
    fn one_qubit(&mut self, qubit: usize, m: &Mat2);
    fn cnot(&mut self, control: usize, target: usize);
    fn controlled(&mut self, control: usize, target: usize, m: &Mat2);
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::X(q)
            | Gate::Y(q)
            | Gate::Z(q)
            | Gate::H(q)
            | Gate::S(q)
            | Gate::Sdg(q)
            | Gate::Rx(q, _)
            | Gate::Ry(q, _)
            | Gate::Rz(q, _) => vec![q],
            Gate::Cnot { control, target }
            | Gate::Crz { control, target, .. }
            | Gate::Block { control, target, .. } => vec![control, target],
        }
    }

    pub fn angles(&self) -> Vec<Angle> {
        match *self {
            Gate::Rx(_, a) | Gate::Ry(_, a) | Gate::Rz(_, a) => vec![a],
            Gate::Crz { angle, .. } => vec![angle],
            Gate::Block { angles, .. } => angles.to_vec(),
            _ => Vec::new(),
        }
    }

    /// Checks qubit indices against the register size and parameter slots
    /// against the parameter count.
    pub fn validate(&self, n_qubits: usize, n_params: usize) -> Result<()> {
        let qubits = self.qubits();
        for &q in &qubits {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(Error::RepeatedQubit(qubits[0]));
        }
        for slot in self.angles().into_iter().filter_map(Angle::slot) {
            if slot >= n_params {
                return Err(Error::MissingParameter { slot, n_params });
            }
        }
        Ok(())
    }

    pub(crate) fn lower<B: Backend>(&self, backend: &mut B, params: &[f64]) -> Result<()> {
        match *self {
            Gate::X(q) => backend.one_qubit(q, &kernel::pauli_x()),
            Gate::Y(q) => backend.one_qubit(q, &kernel::pauli_y()),
            Gate::Z(q) => backend.one_qubit(q, &kernel::pauli_z()),
            Gate::H(q) => backend.one_qubit(q, &kernel::hadamard()),
            Gate::S(q) => backend.one_qubit(q, &kernel::phase_s()),
            Gate::Sdg(q) => backend.one_qubit(q, &kernel::phase_sdg()),
            Gate::Rx(q, a) => backend.one_qubit(q, &kernel::rx(a.resolve(params)?)),
            Gate::Ry(q, a) => backend.one_qubit(q, &kernel::ry(a.resolve(params)?)),
            Gate::Rz(q, a) => backend.one_qubit(q, &kernel::rz(a.resolve(params)?)),
            Gate::Cnot { control, target } => backend.cnot(control, target),
            Gate::Crz { control, target, angle } => {
                backend.controlled(control, target, &kernel::rz(angle.resolve(params)?))
            }
            Gate::Block {
                control,
                target,
                angles: [a, b, c],
            } => {
                let (a, b, c) = (a.resolve(params)?, b.resolve(params)?, c.resolve(params)?);
                backend.one_qubit(control, &kernel::ry(a));
                backend.one_qubit(target, &kernel::ry(b));
                backend.cnot(control, target);
                backend.one_qubit(target, &kernel::ry(c));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::Param(slot) => write!(f, "θ{slot}"),
            Angle::Fixed(theta) => write!(f, "{theta:.4}"),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::X(q) => write!(f, "X q{q}"),
            Gate::Y(q) => write!(f, "Y q{q}"),
            Gate::Z(q) => write!(f, "Z q{q}"),
            Gate::H(q) => write!(f, "H q{q}"),
            Gate::S(q) => write!(f, "S q{q}"),
            Gate::Sdg(q) => write!(f, "Sdg q{q}"),
            Gate::Rx(q, a) => write!(f, "RX({a}) q{q}"),
            Gate::Ry(q, a) => write!(f, "RY({a}) q{q}"),
            Gate::Rz(q, a) => write!(f, "RZ({a}) q{q}"),
            Gate::Cnot { control, target } => write!(f, "CNOT q{control} -> q{target}"),
            Gate::Crz { control, target, angle } => write!(f, "CRZ({angle}) q{control} -> q{target}"),
            Gate::Block {
                control,
                target,
                angles: [a, b, c],
            } => write!(f, "BLOCK({a}, {b}, {c}) q{control} -> q{target}"),
        }
    }
}
