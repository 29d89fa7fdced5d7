use crate::arch::{DistanceMatrix, NodeId, PositionGraph};
use crate::circuit::{BlockDag, BlockId};
use crate::num::{min, Scalar};
use crate::state::{IonAssignment, Qubit};

/// Free slots of executable traps under `phi`.
fn free_executable_slots(phi: &IonAssignment, graph: &PositionGraph) -> Vec<NodeId> {
    graph
        .traps()
        .iter()
        .filter(|t| t.is_executable())
        .flat_map(|t| t.slots())
        .filter(|s| !phi.is_occupied(*s))
        .collect()
}

fn block_term_with<T: Scalar>(
    qubits: &[Qubit],
    phi: &IonAssignment,
    dist: &DistanceMatrix<T>,
    free: &[NodeId],
) -> T {
    let nodes: Vec<NodeId> = qubits.iter().map(|q| phi.node_of(*q)).collect();
    let mut spread = T::zero();
    for (i, &a) in nodes.iter().enumerate() {
        for &b in &nodes[i + 1..] {
            let d = dist.get(a, b);
            if d > spread || d.is_nan() {
                spread = d;
            }
        }
    }
    let to_trap: T = nodes
        .iter()
        .map(|&p| {
            let row = dist.row(p);
            free.iter().map(|s| row[s.index()]).fold(T::infinity(), min)
        })
        .sum();
    spread + to_trap
}

/// Cost of one block: the largest pairwise distance between its qubits plus each qubit's
/// distance to the nearest free slot of an executable trap.
pub fn block_term<T: Scalar>(
    qubits: &[Qubit],
    phi: &IonAssignment,
    graph: &PositionGraph,
    dist: &DistanceMatrix<T>,
) -> T {
    block_term_with(qubits, phi, dist, &free_executable_slots(phi, graph))
}

/// Front-layer mean block cost plus `extended_weight` times the extended-set mean.
pub fn heuristic_score<T: Scalar>(
    front: &[BlockId],
    extended: &[BlockId],
    dag: &BlockDag,
    phi: &IonAssignment,
    graph: &PositionGraph,
    dist: &DistanceMatrix<T>,
    extended_weight: T,
) -> T {
    let free = free_executable_slots(phi, graph);
    let mean = |set: &[BlockId]| -> T {
        if set.is_empty() {
            return T::zero();
        }
        let total: T = set
            .iter()
            .map(|b| block_term_with(&dag.block(*b).qubits, phi, dist, &free))
            .sum();
        total / T::from_usize_lossy(set.len())
    };
    let f = mean(front);
    if extended.is_empty() || extended_weight == T::zero() {
        return f;
    }
    f + extended_weight * mean(extended)
}
