//! Shuttling-aware heuristic search: greedy move selection under the block-distance
//! heuristic, permutation-aware block execution, local-minimum escape with congestion
//! resolution, and reverse-pass initial layout.

mod config;
mod escape;
mod heuristic;
mod layout;
mod permutation;
mod route;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arch::PositionGraph;
use crate::circuit::{BlockDag, BlockId, FrontState};
use crate::state::{executable_trap, IonAssignment, Move, MoveError};

pub use config::SearchConfig;
pub use heuristic::{block_term, heuristic_score};
pub use permutation::{select_permutation, BlockCostOracle, CostTable, TwoQubitGateCount};
pub use route::{Router, Routing};

/// One step of a compiled program.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Instruction {
    Shuttle(Move),
    /// Runs every gate of `block` inside trap `trap` (dense trap index). `perm` is folded into
    /// the assignment: block qubit `i` takes the node of block qubit `perm[i]`.
    Execute {
        block: BlockId,
        trap: usize,
        perm: Vec<usize>,
    },
}

impl Instruction {
    pub fn as_move(&self) -> Option<&Move> {
        match self {
            Instruction::Shuttle(m) => Some(m),
            Instruction::Execute { .. } => None,
        }
    }
}

pub type InstructionList = Vec<Instruction>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RouteError {
    #[error(
        "block {block} acts on {width} qubits but the largest executable trap holds {capacity}"
    )]
    Unroutable {
        block: BlockId,
        width: usize,
        capacity: usize,
    },
    #[error("gave up after {moves} moves (limit {limit}) with {remaining} blocks left")]
    Nontermination {
        moves: usize,
        limit: usize,
        remaining: usize,
    },
    #[error("could not make block {block} executable: {detail}")]
    Deadlock { block: BlockId, detail: String },
    #[error("{qubits} qubits do not fit into {slots} trap slots")]
    CapacityExceeded { qubits: usize, slots: usize },
    #[error("assignment covers {assigned} qubits but the circuit has {expected}")]
    QubitMismatch { assigned: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReplayError {
    #[error("instruction {index}: {source}")]
    Move { index: usize, source: MoveError },
    #[error("instruction {index}: block {block} is not ready")]
    NotReady { index: usize, block: BlockId },
    #[error("instruction {index}: block {block} is not co-located in trap {trap}")]
    NotColocated {
        index: usize,
        block: BlockId,
        trap: usize,
    },
    #[error("instruction {index}: permutation {perm:?} is not a bijection on {width} qubits")]
    BadPermutation {
        index: usize,
        perm: Vec<usize>,
        width: usize,
    },
    #[error("{remaining} blocks never executed")]
    Incomplete { remaining: usize },
}

/// Checks a permutation vector is a bijection on `0..width`.
pub fn is_permutation(perm: &[usize], width: usize) -> bool {
    if perm.len() != width {
        return false;
    }
    let mut seen = vec![false; width];
    perm.iter()
        .all(|&p| p < width && !std::mem::replace(&mut seen[p], true))
}

/// Replays `instrs` from `phi0`, checking every move, that each block runs once after its
/// predecessors in the trap it names, and that every block runs. Returns the final assignment.
pub fn replay(
    instrs: &[Instruction],
    phi0: &IonAssignment,
    graph: &PositionGraph,
    dag: &BlockDag,
) -> Result<IonAssignment, ReplayError> {
    let mut phi = phi0.clone();
    let mut front = FrontState::new(dag, 0);
    for (index, ins) in instrs.iter().enumerate() {
        match ins {
            Instruction::Shuttle(m) => phi
                .apply(graph, m)
                .map_err(|source| ReplayError::Move { index, source })?,
            Instruction::Execute { block, trap, perm } => {
                let b = dag.block(*block);
                if !is_permutation(perm, b.width()) {
                    return Err(ReplayError::BadPermutation {
                        index,
                        perm: perm.clone(),
                        width: b.width(),
                    });
                }
                if executable_trap(&phi, &b.qubits, graph) != Some(*trap) {
                    return Err(ReplayError::NotColocated {
                        index,
                        block: *block,
                        trap: *trap,
                    });
                }
                front
                    .advance_in_place(dag, *block)
                    .map_err(|_| ReplayError::NotReady {
                        index,
                        block: *block,
                    })?;
                phi.permute(&b.qubits, perm);
            }
        }
    }
    if !front.is_done() {
        return Err(ReplayError::Incomplete {
            remaining: dag.len() - front.executed_count(),
        });
    }
    Ok(phi)
}
