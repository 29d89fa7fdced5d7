//! Ion assignment (the system state on the position graph) and the shuttling moves that
//! change it.

mod moves;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arch::{NodeId, PositionGraph};

pub use moves::{apply_move, legal_moves, Move, MoveError, MoveKind};

/// Logical qubit index.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Qubit(pub u32);

impl Qubit {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// The physical rules a shuttling schedule must respect, numbered as they are usually listed
/// for QCCD devices.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Constraint {
    SegmentOccupancy = 1,
    JunctionExclusive = 2,
    TrapCapacity = 3,
    SplitFromTrapEnd = 4,
    MergeIntoTrapEnd = 5,
    MoveThroughJunction = 6,
    ShuttleCollision = 7,
    GateParallelism = 8,
}

impl Constraint {
    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn description(self) -> &'static str {
        match self {
            Constraint::SegmentOccupancy => "only one ion may occupy a segment",
            Constraint::JunctionExclusive => "only one ion may pass through a junction at a time",
            Constraint::TrapCapacity => "a trap cannot hold more ions than its capacity",
            Constraint::SplitFromTrapEnd => {
                "split removes the outermost ion of a trap into an attached segment"
            }
            Constraint::MergeIntoTrapEnd => {
                "merge adds an ion from a segment at the outermost trap position"
            }
            Constraint::MoveThroughJunction => {
                "move transfers an ion between two segments of one junction"
            }
            Constraint::ShuttleCollision => "parallel shuttling operations must not collide",
            Constraint::GateParallelism => {
                "gates in one trap are serialized; only different traps run in parallel"
            }
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "constraint {} ({})", self.number(), self.description())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssignmentError {
    #[error("node {node} assigned to both q{first} and q{second}")]
    NotInjective {
        node: NodeId,
        first: u32,
        second: u32,
    },
    #[error("node {0} does not exist")]
    UnknownNode(NodeId),
}

/// Injective map from logical qubits to position-graph nodes, with its inverse.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IonAssignment {
    node_of: Vec<NodeId>,
    qubit_at: Vec<Option<Qubit>>,
}

impl IonAssignment {
    /// `placements[i]` is the node holding qubit `i`.
    pub fn new(
        graph: &PositionGraph,
        placements: impl IntoIterator<Item = NodeId>,
    ) -> Result<Self, AssignmentError> {
        Self::with_nodes(graph.num_nodes(), placements)
    }

    pub fn with_nodes(
        num_nodes: usize,
        placements: impl IntoIterator<Item = NodeId>,
    ) -> Result<Self, AssignmentError> {
        let node_of: Vec<NodeId> = placements.into_iter().collect();
        let mut qubit_at = vec![None; num_nodes];
        for (q, &n) in node_of.iter().enumerate() {
            let slot = qubit_at
                .get_mut(n.index())
                .ok_or(AssignmentError::UnknownNode(n))?;
            if let Some(prev) = *slot {
                let Qubit(first) = prev;
                return Err(AssignmentError::NotInjective {
                    node: n,
                    first,
                    second: q as u32,
                });
            }
            *slot = Some(Qubit(q as u32));
        }
        Ok(IonAssignment { node_of, qubit_at })
    }

    pub fn num_qubits(&self) -> usize {
        self.node_of.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.qubit_at.len()
    }

    #[inline]
    pub fn node_of(&self, q: Qubit) -> NodeId {
        self.node_of[q.index()]
    }

    #[inline]
    pub fn qubit_at(&self, n: NodeId) -> Option<Qubit> {
        self.qubit_at[n.index()]
    }

    #[inline]
    pub fn is_occupied(&self, n: NodeId) -> bool {
        self.qubit_at[n.index()].is_some()
    }

    /// Node of every qubit, indexed by qubit.
    pub fn placements(&self) -> &[NodeId] {
        &self.node_of
    }

    pub fn occupied_count(&self) -> usize {
        self.qubit_at.iter().filter(|q| q.is_some()).count()
    }

    /// Moves a qubit to an empty node. Callers check legality.
    pub(crate) fn relocate(&mut self, q: Qubit, to: NodeId) {
        let from = self.node_of[q.index()];
        debug_assert!(self.qubit_at[to.index()].is_none());
        self.qubit_at[from.index()] = None;
        self.qubit_at[to.index()] = Some(q);
        self.node_of[q.index()] = to;
    }

    /// Exchanges the nodes of two qubits.
    pub(crate) fn exchange(&mut self, a: Qubit, b: Qubit) {
        let (na, nb) = (self.node_of[a.index()], self.node_of[b.index()]);
        self.node_of[a.index()] = nb;
        self.node_of[b.index()] = na;
        self.qubit_at[na.index()] = Some(b);
        self.qubit_at[nb.index()] = Some(a);
    }

    /// Relabels `qubits` so that `qubits[i]` takes the node previously held by
    /// `qubits[perm[i]]`. No ion moves physically.
    pub fn permute(&mut self, qubits: &[Qubit], perm: &[usize]) {
        debug_assert_eq!(qubits.len(), perm.len());
        let nodes: Vec<NodeId> = qubits.iter().map(|q| self.node_of(*q)).collect();
        for (i, q) in qubits.iter().enumerate() {
            let n = nodes[perm[i]];
            self.node_of[q.index()] = n;
            self.qubit_at[n.index()] = Some(*q);
        }
    }

    /// Stable 64-bit fingerprint of the placement.
    pub fn fingerprint(&self) -> u64 {
        use std::hash::{DefaultHasher, Hash, Hasher};
        let mut h = DefaultHasher::new();
        self.node_of.hash(&mut h);
        h.finish()
    }

    /// Structured text dump, one `qubit -> node` pair per line.
    pub fn dump(&self, graph: &PositionGraph) -> String {
        self.node_of
            .iter()
            .enumerate()
            .map(|(q, n)| format!("q{q} -> {}\n", graph.node_name(*n)))
            .collect()
    }
}

/// Trap that holds every qubit of `qubits`, provided that trap is executable.
pub fn executable_trap(
    phi: &IonAssignment,
    qubits: &[Qubit],
    graph: &PositionGraph,
) -> Option<usize> {
    let first = *qubits.first()?;
    let trap = graph.trap_of(phi.node_of(first))?;
    if !graph.trap(trap).is_executable() {
        return None;
    }
    qubits[1..]
        .iter()
        .all(|q| graph.trap_of(phi.node_of(*q)) == Some(trap))
        .then_some(trap)
}
