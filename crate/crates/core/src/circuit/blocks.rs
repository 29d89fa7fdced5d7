//! Greedy partition of a circuit into blocks of at most `k` qubits, and the dependency DAG
//! between those blocks.

use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Circuit, CircuitError};
use crate::state::Qubit;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockId(pub u32);

impl BlockId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub id: BlockId,
    /// Sorted qubit set.
    pub qubits: Vec<Qubit>,
    /// Indices into the circuit's gate list, ascending.
    pub gates: Vec<usize>,
    pub two_qubit_gates: usize,
    pub one_qubit_gates: usize,
}

impl Block {
    pub fn width(&self) -> usize {
        self.qubits.len()
    }
}

/// Blocks plus dependency edges: `a -> b` when both act on a qubit and `a` acts on it first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockDag {
    blocks: Vec<Block>,
    successors: Vec<Vec<BlockId>>,
    predecessors: Vec<Vec<BlockId>>,
    num_qubits: usize,
}

impl BlockDag {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, id: BlockId) -> &Block {
        &self.blocks[id.index()]
    }

    pub fn successors(&self, id: BlockId) -> &[BlockId] {
        &self.successors[id.index()]
    }

    pub fn predecessors(&self, id: BlockId) -> &[BlockId] {
        &self.predecessors[id.index()]
    }

    pub fn max_width(&self) -> usize {
        self.blocks.iter().map(Block::width).max().unwrap_or(0)
    }

    /// Same blocks with every dependency edge flipped, for a backwards pass over the circuit.
    pub fn reversed(&self) -> BlockDag {
        BlockDag {
            blocks: self.blocks.clone(),
            successors: self.predecessors.clone(),
            predecessors: self.successors.clone(),
            num_qubits: self.num_qubits,
        }
    }

    /// Structured text dump: one line per block with its qubits, gates and successors.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for b in &self.blocks {
            let qs: Vec<String> = b.qubits.iter().map(|q| q.0.to_string()).collect();
            let gs: Vec<String> = b.gates.iter().map(|g| g.to_string()).collect();
            let ss: Vec<String> = self
                .successors(b.id)
                .iter()
                .map(|s| s.0.to_string())
                .collect();
            let _ = writeln!(
                out,
                "block {} qubits=[{}] gates=[{}] cx={} succ=[{}]",
                b.id.0,
                qs.join(","),
                gs.join(","),
                b.two_qubit_gates,
                ss.join(",")
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PartitionError {
    #[error("block width k = {0} is below the minimum of 2")]
    WidthTooSmall(usize),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

struct OpenBlock {
    qubits: Vec<Qubit>,
    gates: Vec<usize>,
    frozen: bool,
}

/// Scans the circuit left to right. A multi-qubit gate joins the most recent unfrozen block
/// that stays within `k` qubits and whose addition keeps every qubit's blocks in creation
/// order; otherwise it opens a new block. A block freezes once one of its qubits shows up in a
/// newer block. Single-qubit gates ride along with their qubit's latest block, or with the
/// next block that touches the qubit; a qubit that only ever sees single-qubit gates gets a
/// width-1 block.
pub fn partition_blocks(circuit: &Circuit, k: usize) -> Result<BlockDag, PartitionError> {
    if k < 2 {
        return Err(PartitionError::WidthTooSmall(k));
    }
    circuit.validate()?;
    let n = circuit.num_qubits;
    let mut open: Vec<OpenBlock> = Vec::new();
    let mut last: Vec<Option<usize>> = vec![None; n];
    let mut pending: Vec<Vec<usize>> = vec![Vec::new(); n];

    for (gi, gate) in circuit.gates.iter().enumerate() {
        if gate.qubits.len() == 1 {
            let q = gate.qubits[0];
            match last[q.index()] {
                Some(b) => open[b].gates.push(gi),
                None => pending[q.index()].push(gi),
            }
            continue;
        }
        let target = (0..open.len()).rev().find(|&b| {
            let blk = &open[b];
            if blk.frozen {
                return false;
            }
            let extra = gate
                .qubits
                .iter()
                .filter(|q| !blk.qubits.contains(q))
                .count();
            blk.qubits.len() + extra <= k
                && gate
                    .qubits
                    .iter()
                    .all(|q| last[q.index()].is_none_or(|l| l <= b))
        });
        let b = match target {
            Some(b) => b,
            None => {
                open.push(OpenBlock {
                    qubits: Vec::new(),
                    gates: Vec::new(),
                    frozen: false,
                });
                open.len() - 1
            }
        };
        for &q in &gate.qubits {
            if let Some(prev) = last[q.index()] {
                if prev != b {
                    open[prev].frozen = true;
                }
            }
            if !open[b].qubits.contains(&q) {
                open[b].qubits.push(q);
            }
            let carried = std::mem::take(&mut pending[q.index()]);
            open[b].gates.extend(carried);
            last[q.index()] = Some(b);
        }
        open[b].gates.push(gi);
    }
    for q in 0..n {
        if !pending[q].is_empty() {
            let gates = std::mem::take(&mut pending[q]);
            open.push(OpenBlock {
                qubits: vec![Qubit(q as u32)],
                gates,
                frozen: false,
            });
        }
    }

    let mut blocks: Vec<Block> = open
        .into_iter()
        .enumerate()
        .map(|(i, mut ob)| {
            ob.qubits.sort();
            ob.gates.sort();
            let two = ob
                .gates
                .iter()
                .filter(|&&g| circuit.gates[g].is_two_qubit())
                .count();
            Block {
                id: BlockId(i as u32),
                qubits: ob.qubits,
                two_qubit_gates: two,
                one_qubit_gates: ob.gates.len() - two,
                gates: ob.gates,
            }
        })
        .collect();
    blocks.shrink_to_fit();

    // Dependencies follow per-qubit gate order.
    let mut owner = vec![0usize; circuit.gates.len()];
    for b in &blocks {
        for &g in &b.gates {
            owner[g] = b.id.index();
        }
    }
    let mut successors = vec![Vec::new(); blocks.len()];
    let mut predecessors = vec![Vec::new(); blocks.len()];
    let mut last_owner: Vec<Option<usize>> = vec![None; n];
    for (gi, gate) in circuit.gates.iter().enumerate() {
        let b = owner[gi];
        for q in &gate.qubits {
            if let Some(a) = last_owner[q.index()] {
                if a != b && !successors[a].contains(&BlockId(b as u32)) {
                    successors[a].push(BlockId(b as u32));
                    predecessors[b].push(BlockId(a as u32));
                }
            }
            last_owner[q.index()] = Some(b);
        }
    }
    for list in successors.iter_mut().chain(predecessors.iter_mut()) {
        list.sort();
    }
    Ok(BlockDag {
        blocks,
        successors,
        predecessors,
        num_qubits: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind;

    fn cx_circuit(n: usize, pairs: &[(u32, u32)]) -> Circuit {
        let mut c = Circuit::new(n);
        for &(a, b) in pairs {
            c.push(GateKind::Cx, &[], &[a, b]);
        }
        c
    }

    #[test]
    fn three_gates_fit_one_block() {
        let dag = partition_blocks(&cx_circuit(3, &[(0, 1), (1, 2), (0, 1)]), 3).unwrap();
        assert_eq!(dag.len(), 1);
        assert_eq!(
            dag.block(BlockId(0)).qubits,
            vec![Qubit(0), Qubit(1), Qubit(2)]
        );
        assert_eq!(dag.block(BlockId(0)).gates, vec![0, 1, 2]);
    }

    #[test]
    fn disjoint_gates_are_independent() {
        let dag = partition_blocks(&cx_circuit(4, &[(0, 1), (2, 3)]), 2).unwrap();
        assert_eq!(dag.len(), 2);
        assert!(dag.successors(BlockId(0)).is_empty());
        assert!(dag.predecessors(BlockId(1)).is_empty());
    }

    #[test]
    fn chain_dependencies() {
        let dag = partition_blocks(&cx_circuit(4, &[(0, 1), (1, 2), (2, 3)]), 2).unwrap();
        assert_eq!(dag.len(), 3);
        assert_eq!(dag.successors(BlockId(0)), &[BlockId(1)]);
        assert_eq!(dag.successors(BlockId(1)), &[BlockId(2)]);
        let rev = dag.reversed();
        assert_eq!(rev.successors(BlockId(2)), &[BlockId(1)]);
    }

    #[test]
    fn frozen_block_is_not_reopened() {
        // b0 = {0,1}; cx(1,2) opens b1 = {1,2} freezing b0; cx(0,1) cannot go back to b0.
        let dag = partition_blocks(&cx_circuit(3, &[(0, 1), (1, 2), (0, 1)]), 2).unwrap();
        assert_eq!(dag.len(), 3);
        assert_eq!(dag.block(BlockId(2)).qubits, vec![Qubit(0), Qubit(1)]);
        assert_eq!(dag.predecessors(BlockId(2)), &[BlockId(0), BlockId(1)]);
    }

    #[test]
    fn single_qubit_gates_ride_along() {
        let mut c = Circuit::new(3);
        c.push(GateKind::H, &[], &[0])
            .push(GateKind::Cx, &[], &[0, 1])
            .push(GateKind::X, &[], &[1])
            .push(GateKind::Rz, &[0.3], &[2]);
        let dag = partition_blocks(&c, 3).unwrap();
        assert_eq!(dag.len(), 2);
        assert_eq!(dag.block(BlockId(0)).gates, vec![0, 1, 2]);
        assert_eq!(dag.block(BlockId(0)).one_qubit_gates, 2);
        assert_eq!(dag.block(BlockId(1)).qubits, vec![Qubit(2)]);
    }

    #[test]
    fn k_below_two() {
        assert_eq!(
            partition_blocks(&Circuit::new(2), 1),
            Err(PartitionError::WidthTooSmall(1))
        );
    }

    #[test]
    fn dump_lists_blocks() {
        let dag = partition_blocks(&cx_circuit(3, &[(0, 1), (1, 2)]), 2).unwrap();
        assert_eq!(dag.dump(), "block 0 qubits=[0,1] gates=[0] cx=1 succ=[1]\nblock 1 qubits=[1,2] gates=[1] cx=1 succ=[]\n");
    }
}
