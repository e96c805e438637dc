use super::gate::{Angle, Gate};
use crate::error::{Error, Result};

/// Ordered list of gates over a fixed register with a shared parameter vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    ops: Vec<Gate>,
    n_params: usize,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self::with_params(n_qubits, 0)
    }

    /// Empty circuit that already owns `n_params` parameter slots.
    pub fn with_params(n_qubits: usize, n_params: usize) -> Self {
        assert!(n_qubits > 0, "a circuit needs at least one qubit");
        Circuit {
            n_qubits,
            ops: Vec::new(),
            n_params,
        }
    }

    /// Reserves the next parameter slot.
    pub fn param(&mut self) -> Angle {
        self.n_params += 1;
        Angle::Param(self.n_params - 1)
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(self.n_qubits, self.n_params)?;
        self.ops.push(gate);
        Ok(self)
    }

    pub fn extend<I: IntoIterator<Item = Gate>>(&mut self, gates: I) -> Result<&mut Self> {
        for gate in gates {
            self.push(gate)?;
        }
        Ok(self)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn ops(&self) -> &[Gate] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub(crate) fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params {
            return Err(Error::ParamLengthMismatch {
                expected: self.n_params,
                actual: params.len(),
            });
        }
        Ok(())
    }
}
