use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Constraint, IonAssignment, Qubit};
use crate::arch::{EdgeLabel, NodeId, PositionGraph};

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    /// Trap end slot to attached segment.
    Split,
    /// Segment to an empty trap end slot.
    Merge,
    /// Segment to segment through a junction.
    Move,
    /// Two neighbouring ions of one trap exchange slots.
    InnerSwap,
    /// One ion steps into a neighbouring empty slot of its trap.
    Shift,
}

impl MoveKind {
    pub fn name(self) -> &'static str {
        match self {
            MoveKind::Split => "split",
            MoveKind::Merge => "merge",
            MoveKind::Move => "move",
            MoveKind::InnerSwap => "inner_swap",
            MoveKind::Shift => "shift",
        }
    }

    /// Split, merge and move take ions outside of their trap; the in-trap reorders do not.
    pub fn is_transport(self) -> bool {
        matches!(self, MoveKind::Split | MoveKind::Merge | MoveKind::Move)
    }
}

/// One shuttling primitive. Field order gives the canonical `(kind, from, to)` sort.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Move {
    pub kind: MoveKind,
    pub from: NodeId,
    pub to: NodeId,
    pub qubit: Qubit,
    /// The ion at `to` for an inner swap.
    pub other: Option<Qubit>,
}

impl Move {
    /// Qubits whose ions take part in the move.
    pub fn qubits(&self) -> impl Iterator<Item = Qubit> {
        std::iter::once(self.qubit).chain(self.other)
    }

    /// The move that steps the ion at `from` into the neighbouring node `to` under `phi`, or
    /// `None` if the two are not adjacent or `from` is empty. Legality is not checked.
    pub fn step(
        phi: &IonAssignment,
        graph: &PositionGraph,
        from: NodeId,
        to: NodeId,
    ) -> Option<Move> {
        let edge = graph.edge_between(from, to)?;
        let qubit = phi.qubit_at(from)?;
        let kind = match edge.label {
            EdgeLabel::Swap if phi.is_occupied(to) => MoveKind::InnerSwap,
            EdgeLabel::Swap => MoveKind::Shift,
            EdgeLabel::MergeSplit if graph.is_segment(from) => MoveKind::Merge,
            EdgeLabel::MergeSplit => MoveKind::Split,
            EdgeLabel::Move => MoveKind::Move,
        };
        let other = if kind == MoveKind::InnerSwap {
            phi.qubit_at(to)
        } else {
            None
        };
        Some(Move {
            kind,
            from,
            to,
            qubit,
            other,
        })
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}->{}",
            self.kind.name(),
            self.qubit,
            self.from,
            self.to
        )?;
        if let Some(o) = self.other {
            write!(f, " with {o}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("illegal {kind:?} {from}->{to}: {reason}{}", constraint.map(|c| format!(" [{c}]")).unwrap_or_default())]
pub struct MoveError {
    pub kind: MoveKind,
    pub from: NodeId,
    pub to: NodeId,
    pub constraint: Option<Constraint>,
    pub reason: String,
}

impl MoveError {
    fn new(m: &Move, constraint: Option<Constraint>, reason: impl Into<String>) -> Self {
        MoveError {
            kind: m.kind,
            from: m.from,
            to: m.to,
            constraint,
            reason: reason.into(),
        }
    }
}

/// Every move that is legal from `phi`, sorted by `(kind, from, to)`.
pub fn legal_moves(phi: &IonAssignment, graph: &PositionGraph) -> Vec<Move> {
    let mut out = Vec::new();
    for e in graph.edges() {
        let (qu, qv) = (phi.qubit_at(e.u), phi.qubit_at(e.v));
        match e.label {
            EdgeLabel::Swap => match (qu, qv) {
                (Some(a), Some(b)) => {
                    let (from, to, qubit, other) = if e.u < e.v {
                        (e.u, e.v, a, b)
                    } else {
                        (e.v, e.u, b, a)
                    };
                    out.push(Move {
                        kind: MoveKind::InnerSwap,
                        from,
                        to,
                        qubit,
                        other: Some(other),
                    });
                }
                (Some(a), None) => out.push(Move {
                    kind: MoveKind::Shift,
                    from: e.u,
                    to: e.v,
                    qubit: a,
                    other: None,
                }),
                (None, Some(b)) => out.push(Move {
                    kind: MoveKind::Shift,
                    from: e.v,
                    to: e.u,
                    qubit: b,
                    other: None,
                }),
                (None, None) => {}
            },
            EdgeLabel::MergeSplit => {
                let (slot, seg) = if graph.is_segment(e.u) {
                    (e.v, e.u)
                } else {
                    (e.u, e.v)
                };
                match (phi.qubit_at(slot), phi.qubit_at(seg)) {
                    (Some(q), None) => out.push(Move {
                        kind: MoveKind::Split,
                        from: slot,
                        to: seg,
                        qubit: q,
                        other: None,
                    }),
                    (None, Some(q)) => out.push(Move {
                        kind: MoveKind::Merge,
                        from: seg,
                        to: slot,
                        qubit: q,
                        other: None,
                    }),
                    _ => {}
                }
            }
            EdgeLabel::Move => match (qu, qv) {
                (Some(a), None) => out.push(Move {
                    kind: MoveKind::Move,
                    from: e.u,
                    to: e.v,
                    qubit: a,
                    other: None,
                }),
                (None, Some(b)) => out.push(Move {
                    kind: MoveKind::Move,
                    from: e.v,
                    to: e.u,
                    qubit: b,
                    other: None,
                }),
                _ => {}
            },
        }
    }
    out.sort();
    out
}

/// Returns `phi` after `m`, or the rule `m` breaks.
pub fn apply_move(
    phi: &IonAssignment,
    graph: &PositionGraph,
    m: &Move,
) -> Result<IonAssignment, MoveError> {
    let mut next = phi.clone();
    next.apply(graph, m)?;
    Ok(next)
}

impl IonAssignment {
    /// Checks `m` against the device rules and applies it in place.
    pub fn apply(&mut self, graph: &PositionGraph, m: &Move) -> Result<(), MoveError> {
        check(self, graph, m)?;
        match m.kind {
            MoveKind::InnerSwap => self.exchange(m.qubit, m.other.expect("checked")),
            _ => self.relocate(m.qubit, m.to),
        }
        Ok(())
    }
}

fn check(phi: &IonAssignment, graph: &PositionGraph, m: &Move) -> Result<(), MoveError> {
    let n = graph.num_nodes();
    if m.from.index() >= n || m.to.index() >= n || m.qubit.index() >= phi.num_qubits() {
        return Err(MoveError::new(m, None, "node or qubit out of range"));
    }
    if phi.qubit_at(m.from) != Some(m.qubit) {
        return Err(MoveError::new(
            m,
            None,
            format!("{} is not at {}", m.qubit, m.from),
        ));
    }
    let edge = graph.edge_between(m.from, m.to);
    let label = edge.map(|e| e.label);
    let target = phi.qubit_at(m.to);
    match m.kind {
        MoveKind::Split => {
            if label != Some(EdgeLabel::MergeSplit)
                || !graph.is_trap_end(m.from)
                || !graph.is_segment(m.to)
            {
                return Err(MoveError::new(
                    m,
                    Some(Constraint::SplitFromTrapEnd),
                    "not a trap end to attached segment",
                ));
            }
            if target.is_some() {
                return Err(MoveError::new(
                    m,
                    Some(Constraint::SegmentOccupancy),
                    "segment is occupied",
                ));
            }
        }
        MoveKind::Merge => {
            if label != Some(EdgeLabel::MergeSplit)
                || !graph.is_segment(m.from)
                || !graph.is_trap_end(m.to)
            {
                return Err(MoveError::new(
                    m,
                    Some(Constraint::MergeIntoTrapEnd),
                    "not a segment to attached trap end",
                ));
            }
            if target.is_some() {
                return Err(MoveError::new(
                    m,
                    Some(Constraint::TrapCapacity),
                    "trap end slot is occupied",
                ));
            }
        }
        MoveKind::Move => {
            if label != Some(EdgeLabel::Move) {
                return Err(MoveError::new(
                    m,
                    Some(Constraint::MoveThroughJunction),
                    "segments do not share a junction",
                ));
            }
            if target.is_some() {
                return Err(MoveError::new(
                    m,
                    Some(Constraint::SegmentOccupancy),
                    "segment is occupied",
                ));
            }
        }
        MoveKind::InnerSwap => {
            if label != Some(EdgeLabel::Swap) {
                return Err(MoveError::new(
                    m,
                    None,
                    "slots are not neighbours within one trap",
                ));
            }
            if target.is_none() || target != m.other {
                return Err(MoveError::new(m, None, "inner swap partner does not match"));
            }
        }
        MoveKind::Shift => {
            if label != Some(EdgeLabel::Swap) {
                return Err(MoveError::new(
                    m,
                    None,
                    "slots are not neighbours within one trap",
                ));
            }
            if target.is_some() {
                return Err(MoveError::new(
                    m,
                    Some(Constraint::TrapCapacity),
                    "slot is occupied",
                ));
            }
        }
    }
    if m.kind != MoveKind::InnerSwap && m.other.is_some() {
        return Err(MoveError::new(
            m,
            None,
            "only inner swaps carry a second ion",
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::preset;

    fn mini() -> PositionGraph {
        PositionGraph::build(&preset("MINI", 2).unwrap()).unwrap()
    }

    #[test]
    fn mini_three_ions_has_four_moves() {
        let g = mini();
        let phi = IonAssignment::new(&g, [0, 1, 2].map(NodeId)).unwrap();
        let moves = legal_moves(&phi, &g);
        let summary: Vec<_> = moves.iter().map(|m| (m.kind, m.from.0, m.to.0)).collect();
        assert_eq!(
            summary,
            vec![
                (MoveKind::Split, 0, 4),
                (MoveKind::Split, 2, 5),
                (MoveKind::InnerSwap, 0, 1),
                (MoveKind::Shift, 2, 3),
            ]
        );
    }

    #[test]
    fn empty_assignment_has_no_moves() {
        let g = mini();
        let phi = IonAssignment::new(&g, []).unwrap();
        assert!(legal_moves(&phi, &g).is_empty());
    }

    #[test]
    fn saturated_segments_leave_only_inner_swaps() {
        let g = mini();
        let phi = IonAssignment::new(&g, [0, 1, 2, 3, 4, 5].map(NodeId)).unwrap();
        let moves = legal_moves(&phi, &g);
        assert_eq!(moves.len(), 2);
        assert!(moves.iter().all(|m| m.kind == MoveKind::InnerSwap));
    }

    #[test]
    fn split_then_merge_is_identity() {
        let g = mini();
        let phi = IonAssignment::new(&g, [0, 1, 2].map(NodeId)).unwrap();
        let split = Move::step(&phi, &g, NodeId(0), NodeId(4)).unwrap();
        assert_eq!(split.kind, MoveKind::Split);
        let mid = apply_move(&phi, &g, &split).unwrap();
        let merge = Move::step(&mid, &g, NodeId(4), NodeId(0)).unwrap();
        assert_eq!(merge.kind, MoveKind::Merge);
        assert_eq!(apply_move(&mid, &g, &merge).unwrap(), phi);
    }

    #[test]
    fn inner_swap_is_an_involution() {
        let g = mini();
        let phi = IonAssignment::new(&g, [0, 1].map(NodeId)).unwrap();
        let swap = Move::step(&phi, &g, NodeId(0), NodeId(1)).unwrap();
        let once = apply_move(&phi, &g, &swap).unwrap();
        assert_eq!(once.node_of(Qubit(0)), NodeId(1));
        let back = Move::step(&once, &g, NodeId(0), NodeId(1)).unwrap();
        assert_eq!(apply_move(&once, &g, &back).unwrap(), phi);
    }

    #[test]
    fn rejections_name_the_rule() {
        let g = mini();
        let phi = IonAssignment::new(&g, [0, 1, 4, 5].map(NodeId)).unwrap();
        let into_occupied = Move {
            kind: MoveKind::Move,
            from: NodeId(4),
            to: NodeId(5),
            qubit: Qubit(2),
            other: None,
        };
        assert_eq!(
            apply_move(&phi, &g, &into_occupied).unwrap_err().constraint,
            Some(Constraint::SegmentOccupancy)
        );

        let from_inner = Move {
            kind: MoveKind::Split,
            from: NodeId(1),
            to: NodeId(4),
            qubit: Qubit(1),
            other: None,
        };
        assert_eq!(
            apply_move(&phi, &g, &from_inner).unwrap_err().constraint,
            Some(Constraint::SplitFromTrapEnd)
        );

        let merge_full = Move {
            kind: MoveKind::Merge,
            from: NodeId(4),
            to: NodeId(0),
            qubit: Qubit(2),
            other: None,
        };
        assert_eq!(
            apply_move(&phi, &g, &merge_full).unwrap_err().constraint,
            Some(Constraint::TrapCapacity)
        );

        let merge_far = Move {
            kind: MoveKind::Merge,
            from: NodeId(4),
            to: NodeId(2),
            qubit: Qubit(2),
            other: None,
        };
        assert_eq!(
            apply_move(&phi, &g, &merge_far).unwrap_err().constraint,
            Some(Constraint::MergeIntoTrapEnd)
        );

        let jump = Move {
            kind: MoveKind::Move,
            from: NodeId(4),
            to: NodeId(3),
            qubit: Qubit(2),
            other: None,
        };
        assert_eq!(
            apply_move(&phi, &g, &jump).unwrap_err().constraint,
            Some(Constraint::MoveThroughJunction)
        );

        let wrong_ion = Move {
            kind: MoveKind::Shift,
            from: NodeId(2),
            to: NodeId(3),
            qubit: Qubit(0),
            other: None,
        };
        assert!(apply_move(&phi, &g, &wrong_ion).is_err());
    }
}
