//! QCCD device model, its position-graph encoding, and shuttle-cost distances.

mod distance;
mod graph;
mod spec;
mod timing;

use thiserror::Error;

pub use distance::{all_pairs_shuttle_cost, DistanceMatrix};
pub use graph::{Edge, EdgeLabel, JunctionInfo, NodeId, NodeKind, PositionGraph, TrapInfo};
pub use spec::{
    junction_chain, preset, ArchitectureSpec, Endpoint, JunctionId, JunctionSpec, Preset,
    SegmentId, SegmentSpec, TrapId, TrapKind, TrapSpec,
};
pub use timing::TimingModel;

use crate::num::Scalar;
use crate::state::IonAssignment;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArchError {
    #[error("architecture has no traps")]
    Empty,
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("trap {0} has zero capacity")]
    ZeroCapacity(TrapId),
    #[error("{endpoint} refers to undeclared segment {segment}")]
    DanglingSegment {
        segment: SegmentId,
        endpoint: String,
    },
    #[error("segment {segment} attached twice to {endpoint}")]
    DuplicateAttachment {
        segment: SegmentId,
        endpoint: String,
    },
    #[error("segment {segment} has {count} endpoints, expected 2")]
    SegmentEndpoints { segment: SegmentId, count: usize },
    #[error("junction {junction} has degree {degree}, expected at least 2")]
    JunctionDegree { junction: JunctionId, degree: usize },
    #[error("architecture has no executable trap")]
    NoExecutableTrap,
    #[error("device graph is not connected")]
    Disconnected,
    #[error("unknown architecture preset '{0}'")]
    UnknownPreset(String),
    #[error("malformed architecture document: {0}")]
    Format(String),
    #[error("invalid timing model: {0}")]
    Timing(String),
}

/// Distance from `p` to the closest unoccupied slot of any executable trap; `+inf` when every
/// executable trap is full.
pub fn nearest_free_trap_distance<T: Scalar>(
    p: NodeId,
    phi: &IonAssignment,
    graph: &PositionGraph,
    dist: &DistanceMatrix<T>,
) -> T {
    let row = dist.row(p);
    graph
        .traps()
        .iter()
        .filter(|t| t.is_executable())
        .flat_map(|t| t.slots())
        .filter(|s| phi.qubit_at(*s).is_none())
        .map(|s| row[s.index()])
        .fold(T::infinity(), crate::num::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::Qubit;

    #[test]
    fn nearest_free_trap_on_mini() {
        let g = PositionGraph::build(&preset("MINI", 2).unwrap()).unwrap();
        let d = all_pairs_shuttle_cost(&g, &TimingModel::uniform(1.0f64));
        let phi = IonAssignment::new(&g, [0, 1, 2].map(NodeId)).unwrap();
        // Only t2s1 is free.
        assert_eq!(nearest_free_trap_distance(NodeId(1), &phi, &g, &d), 5.0);
        assert_eq!(nearest_free_trap_distance(NodeId(2), &phi, &g, &d), 1.0);
        let full = IonAssignment::new(&g, [0, 1, 2, 3].map(NodeId)).unwrap();
        assert!(nearest_free_trap_distance(NodeId(4), &full, &g, &d).is_infinite());
        assert_eq!(full.node_of(Qubit(3)), NodeId(3));
    }

    #[test]
    fn storage_traps_do_not_count() {
        let mut spec = preset("MINI", 2).unwrap();
        spec.traps[1].kind = TrapKind::Storage;
        let g = PositionGraph::build(&spec).unwrap();
        let d = all_pairs_shuttle_cost(&g, &TimingModel::uniform(1.0f64));
        let phi = IonAssignment::new(&g, [0, 1].map(NodeId)).unwrap();
        assert!(nearest_free_trap_distance(NodeId(4), &phi, &g, &d).is_infinite());
    }
}
