//! Circuits, their block partition and the front-layer view the router walks.

mod blocks;
mod front;
mod generate;
mod qasm;

use std::fmt;

use smallvec::SmallVec;
use thiserror::Error;

use crate::state::Qubit;

pub use blocks::{partition_blocks, Block, BlockDag, BlockId, PartitionError};
pub use front::{FrontError, FrontState};
pub use generate::{generate, GenerateError, GeneratorKind, GeneratorParams};
pub use qasm::{emit_qasm, parse_qasm, ParseError};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    U1,
    U2,
    U3,
    Rz,
    Rx,
    Ry,
    H,
    X,
    Y,
    Z,
    Sx,
    T,
    Tdg,
    S,
    Sdg,
    Cx,
    Cz,
    Rzz,
}

impl GateKind {
    const ALL: [GateKind; 18] = [
        GateKind::U1,
        GateKind::U2,
        GateKind::U3,
        GateKind::Rz,
        GateKind::Rx,
        GateKind::Ry,
        GateKind::H,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::Sx,
        GateKind::T,
        GateKind::Tdg,
        GateKind::S,
        GateKind::Sdg,
        GateKind::Cx,
        GateKind::Cz,
        GateKind::Rzz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::U1 => "u1",
            GateKind::U2 => "u2",
            GateKind::U3 => "u3",
            GateKind::Rz => "rz",
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::Sx => "sx",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::Cx => "cx",
            GateKind::Cz => "cz",
            GateKind::Rzz => "rzz",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.name() == name)
    }

    pub fn num_params(self) -> usize {
        match self {
            GateKind::U1 | GateKind::Rz | GateKind::Rx | GateKind::Ry | GateKind::Rzz => 1,
            GateKind::U2 => 2,
            GateKind::U3 => 3,
            _ => 0,
        }
    }

    pub fn num_qubits(self) -> usize {
        match self {
            GateKind::Cx | GateKind::Cz | GateKind::Rzz => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    /// Angles in radians.
    pub params: SmallVec<[f64; 3]>,
    pub qubits: SmallVec<[Qubit; 2]>,
}

impl Gate {
    pub fn new(kind: GateKind, params: &[f64], qubits: &[u32]) -> Self {
        Gate {
            kind,
            params: params.into(),
            qubits: qubits.iter().map(|&q| Qubit(q)).collect(),
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.qubits.len() == 2
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error("gate {index} ({name}) uses qubit {qubit} but the circuit has {num_qubits} qubits")]
    QubitOutOfRange {
        index: usize,
        name: &'static str,
        qubit: u32,
        num_qubits: usize,
    },
    #[error("gate {index} ({name}) applies to the same qubit twice")]
    IdenticalOperands { index: usize, name: &'static str },
    #[error("gate {index} ({name}) expects {expected} operands and {params} parameters")]
    Arity {
        index: usize,
        name: &'static str,
        expected: usize,
        params: usize,
    },
}

/// Ordered list of one- and two-qubit gates on `num_qubits` wires.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            gates: Vec::new(),
        }
    }

    /// Appends a gate; operand validity is checked by [`Circuit::validate`].
    pub fn push(&mut self, kind: GateKind, params: &[f64], qubits: &[u32]) -> &mut Self {
        self.gates.push(Gate::new(kind, params, qubits));
        self
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        for (index, g) in self.gates.iter().enumerate() {
            let name = g.kind.name();
            if g.qubits.len() != g.kind.num_qubits() || g.params.len() != g.kind.num_params() {
                return Err(CircuitError::Arity {
                    index,
                    name,
                    expected: g.kind.num_qubits(),
                    params: g.kind.num_params(),
                });
            }
            for q in &g.qubits {
                if q.index() >= self.num_qubits {
                    return Err(CircuitError::QubitOutOfRange {
                        index,
                        name,
                        qubit: q.0,
                        num_qubits: self.num_qubits,
                    });
                }
            }
            if g.is_two_qubit() && g.qubits[0] == g.qubits[1] {
                return Err(CircuitError::IdenticalOperands { index, name });
            }
        }
        Ok(())
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&emit_qasm(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let mut c = Circuit::new(2);
        c.push(GateKind::Cx, &[], &[0, 1]);
        c.validate().unwrap();
        c.push(GateKind::Cz, &[], &[1, 1]);
        assert!(matches!(
            c.validate(),
            Err(CircuitError::IdenticalOperands { index: 1, .. })
        ));
        let mut c = Circuit::new(1);
        c.push(GateKind::H, &[], &[3]);
        assert!(matches!(
            c.validate(),
            Err(CircuitError::QubitOutOfRange { .. })
        ));
        let mut c = Circuit::new(1);
        c.push(GateKind::Rz, &[], &[0]);
        assert!(matches!(c.validate(), Err(CircuitError::Arity { .. })));
    }

    #[test]
    fn names_round_trip() {
        for g in GateKind::ALL {
            assert_eq!(GateKind::from_name(g.name()), Some(g));
        }
        assert_eq!(GateKind::from_name("ccx"), None);
    }
}
