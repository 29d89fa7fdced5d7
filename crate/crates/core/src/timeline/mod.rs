//! Timed parallel schedules: greedy list scheduling of an instruction list, a discrete-event
//! validator for the device rules, summary statistics and the trace file format.

mod stats;
mod trace;
mod validate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arch::{EdgeLabel, PositionGraph, TimingModel};
use crate::circuit::BlockDag;
use crate::num::Scalar;
use crate::scheduler::{replay, Instruction, ReplayError};
use crate::state::{IonAssignment, MoveKind};

pub use stats::{stats, ScheduleStats};
pub use trace::{Trace, TraceError, TraceEvent, STATS_SCHEMA, TRACE_SCHEMA};
pub use validate::{validate, Violation, ViolationKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TimedEvent<T = f64> {
    pub instruction: Instruction,
    pub start: T,
    pub end: T,
}

impl<T: Scalar> TimedEvent<T> {
    pub fn duration(&self) -> T {
        self.end - self.start
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TimedSchedule<T = f64> {
    /// Events in instruction-list order.
    pub events: Vec<TimedEvent<T>>,
    pub makespan: T,
}

impl<T: Scalar> TimedSchedule<T> {
    pub fn empty() -> Self {
        TimedSchedule {
            events: Vec::new(),
            makespan: T::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("instruction list does not replay: {0}")]
    Replay(#[from] ReplayError),
}

/// Duration of a shuttle primitive.
pub fn move_duration<T: Scalar>(kind: MoveKind, timing: &TimingModel<T>) -> T {
    match kind {
        MoveKind::Split => timing.split,
        MoveKind::Merge => timing.merge,
        MoveKind::Move => timing.move_,
        MoveKind::InnerSwap | MoveKind::Shift => timing.inner_swap,
    }
}

/// Places every instruction at the earliest time its qubits, nodes, junction and trap are
/// free, keeping list order on every shared resource. A trap runs one block at a time and
/// no shuttle touches a trap while a block runs there.
pub fn schedule<T: Scalar>(
    instrs: &[Instruction],
    phi0: &IonAssignment,
    graph: &PositionGraph,
    dag: &BlockDag,
    timing: &TimingModel<T>,
) -> Result<TimedSchedule<T>, ScheduleError> {
    replay(instrs, phi0, graph, dag)?;
    let mut node_free = vec![T::zero(); graph.num_nodes()];
    let mut qubit_free = vec![T::zero(); phi0.num_qubits()];
    let mut junction_free = vec![T::zero(); graph.junctions().len()];
    let mut gate_free = vec![T::zero(); graph.traps().len()];
    let mut shuttle_free = vec![T::zero(); graph.traps().len()];
    let mut phi = phi0.clone();
    let mut events = Vec::with_capacity(instrs.len());
    let mut makespan = T::zero();
    let max = |a: T, b: T| if b > a { b } else { a };

    for ins in instrs {
        let (start, end) = match ins {
            Instruction::Shuttle(m) => {
                let edge = graph
                    .edge_between(m.from, m.to)
                    .expect("replayed move follows an edge");
                let junction = (edge.label == EdgeLabel::Move)
                    .then_some(edge.junction)
                    .flatten();
                let traps: Vec<usize> = [graph.trap_of(m.from), graph.trap_of(m.to)]
                    .into_iter()
                    .flatten()
                    .collect();
                let mut start = max(node_free[m.from.index()], node_free[m.to.index()]);
                for q in m.qubits() {
                    start = max(start, qubit_free[q.index()]);
                }
                if let Some(j) = junction {
                    start = max(start, junction_free[j]);
                }
                for &t in &traps {
                    start = max(start, gate_free[t]);
                }
                let end = start + move_duration(m.kind, timing);
                node_free[m.from.index()] = end;
                node_free[m.to.index()] = end;
                for q in m.qubits() {
                    qubit_free[q.index()] = end;
                }
                if let Some(j) = junction {
                    junction_free[j] = end;
                }
                for &t in &traps {
                    shuttle_free[t] = max(shuttle_free[t], end);
                }
                phi.apply(graph, m).expect("replayed");
                (start, end)
            }
            Instruction::Execute { block, trap, perm } => {
                let b = dag.block(*block);
                let mut start = max(gate_free[*trap], shuttle_free[*trap]);
                for q in &b.qubits {
                    start = max(start, qubit_free[q.index()]);
                    start = max(start, node_free[phi.node_of(*q).index()]);
                }
                let end = start + timing.block_duration(b.one_qubit_gates, b.two_qubit_gates);
                for q in &b.qubits {
                    qubit_free[q.index()] = end;
                    node_free[phi.node_of(*q).index()] = end;
                }
                gate_free[*trap] = end;
                phi.permute(&b.qubits, perm);
                (start, end)
            }
        };
        makespan = max(makespan, end);
        events.push(TimedEvent {
            instruction: ins.clone(),
            start,
            end,
        });
    }
    Ok(TimedSchedule { events, makespan })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::{preset, NodeId};
    use crate::circuit::{partition_blocks, BlockId, Circuit, GateKind};
    use crate::state::{Move, Qubit};

    fn h_graph() -> PositionGraph {
        PositionGraph::build(&preset("H", 2).unwrap()).unwrap()
    }

    fn mv(kind: MoveKind, from: u32, to: u32, q: u32) -> Instruction {
        Instruction::Shuttle(Move {
            kind,
            from: NodeId(from),
            to: NodeId(to),
            qubit: Qubit(q),
            other: None,
        })
    }

    #[test]
    fn empty_list_has_zero_makespan() {
        let g = h_graph();
        let dag = partition_blocks(&Circuit::new(0), 2).unwrap();
        let phi = IonAssignment::new(&g, []).unwrap();
        let ts = schedule(&[], &phi, &g, &dag, &TimingModel::<f64>::default()).unwrap();
        assert_eq!(ts.makespan, 0.0);
        assert!(ts.events.is_empty());
    }

    #[test]
    fn splits_in_different_traps_run_together() {
        // H capacity 2: trap 0 slots 0-1, trap 1 slots 2-3; segments start at node 8.
        let g = h_graph();
        let dag = partition_blocks(&Circuit::new(2), 2).unwrap();
        let phi = IonAssignment::new(&g, [0, 2].map(NodeId)).unwrap();
        let instrs = [mv(MoveKind::Split, 0, 8, 0), mv(MoveKind::Split, 2, 9, 1)];
        let ts = schedule(&instrs, &phi, &g, &dag, &TimingModel::<f64>::default()).unwrap();
        assert_eq!(ts.events[0].start, 0.0);
        assert_eq!(ts.events[1].start, 0.0);
        assert_eq!(ts.makespan, 80.0);
    }

    #[test]
    fn junction_moves_serialize() {
        let g = h_graph();
        let dag = partition_blocks(&Circuit::new(2), 2).unwrap();
        // Ions on S0 and S1; both move through junction 0 to S4 and... S0->S4, then S1->S0.
        let phi = IonAssignment::new(&g, [8, 9].map(NodeId)).unwrap();
        let instrs = [mv(MoveKind::Move, 8, 12, 0), mv(MoveKind::Move, 9, 8, 1)];
        let ts = schedule(&instrs, &phi, &g, &dag, &TimingModel::<f64>::default()).unwrap();
        assert_eq!(ts.events[1].start, ts.events[0].end);
        assert_eq!(ts.makespan, 200.0);
    }

    #[test]
    fn blocks_in_one_trap_serialize_and_differ_across_traps() {
        let g = h_graph();
        let mut c = Circuit::new(4);
        c.push(GateKind::Cx, &[], &[0, 1])
            .push(GateKind::Cx, &[], &[2, 3])
            .push(GateKind::H, &[], &[0]);
        let dag = partition_blocks(&c, 2).unwrap();
        let phi = IonAssignment::new(&g, [0, 1, 2, 3].map(NodeId)).unwrap();
        let instrs = [
            Instruction::Execute {
                block: BlockId(0),
                trap: 0,
                perm: vec![0, 1],
            },
            Instruction::Execute {
                block: BlockId(1),
                trap: 1,
                perm: vec![0, 1],
            },
        ];
        let ts = schedule(&instrs, &phi, &g, &dag, &TimingModel::<f64>::default()).unwrap();
        assert_eq!(ts.events[0].start, 0.0);
        assert_eq!(ts.events[1].start, 0.0);
        // Block 0 holds h(0) and cx(0,1): 30 + 100.
        assert_eq!(ts.events[0].end, 130.0);
    }

    #[test]
    fn refuses_invalid_lists() {
        let g = h_graph();
        let dag = partition_blocks(&Circuit::new(2), 2).unwrap();
        let phi = IonAssignment::new(&g, [0, 2].map(NodeId)).unwrap();
        let instrs = [mv(MoveKind::Split, 1, 8, 0)];
        assert!(matches!(
            schedule(&instrs, &phi, &g, &dag, &TimingModel::<f64>::default()),
            Err(ScheduleError::Replay(ReplayError::Move { index: 0, .. }))
        ));
    }
}
