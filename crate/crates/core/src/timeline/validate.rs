use std::fmt;

use serde::{Deserialize, Serialize};

use super::{move_duration, TimedSchedule};
use crate::arch::{EdgeLabel, NodeId, PositionGraph, TimingModel};
use crate::circuit::{BlockDag, FrontState};
use crate::num::Scalar;
use crate::scheduler::{is_permutation, Instruction};
use crate::state::{Constraint, IonAssignment, MoveKind};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Constraint(Constraint),
    /// Event length differs from the timing model.
    Duration,
    /// The moved ion is not where the event says.
    Replay,
    /// A block ran with its qubits outside one executable trap.
    CoLocation,
    /// A block ran before a predecessor finished, twice, or never.
    BlockOrder,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::Constraint(c) => write!(f, "{c}"),
            ViolationKind::Duration => f.write_str("duration mismatch"),
            ViolationKind::Replay => f.write_str("replay mismatch"),
            ViolationKind::CoLocation => f.write_str("block not co-located"),
            ViolationKind::BlockOrder => f.write_str("block order"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub time: f64,
    /// Index into the schedule's events; `None` for end-of-schedule checks.
    pub event: Option<usize>,
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.event {
            Some(i) => write!(
                f,
                "t={} event #{i}: {}: {}",
                self.time, self.kind, self.message
            ),
            None => write!(f, "t={}: {}: {}", self.time, self.kind, self.message),
        }
    }
}

/// Resources held by a running event.
struct Active<T> {
    end: T,
    index: usize,
    nodes: Vec<NodeId>,
    junction: Option<usize>,
    /// Traps this event touches, and whether it runs gates there.
    traps: Vec<(usize, bool)>,
    /// Block finishing with this event.
    block: Option<crate::circuit::BlockId>,
}

struct Sweep<'a, T> {
    graph: &'a PositionGraph,
    tol: T,
    out: Vec<Violation>,
}

impl<T: Scalar> Sweep<'_, T> {
    fn flag(&mut self, time: T, event: usize, kind: ViolationKind, message: String) {
        self.out.push(Violation {
            time: time.as_f64(),
            event: Some(event),
            kind,
            message,
        });
    }

    fn name(&self, n: NodeId) -> String {
        self.graph.node_name(n)
    }
}

fn trap_load(phi: &IonAssignment, graph: &PositionGraph, trap: usize) -> usize {
    graph
        .trap(trap)
        .slots()
        .filter(|s| phi.is_occupied(*s))
        .count()
}

/// Replays a timed schedule as a discrete-event simulation and reports every broken rule:
/// the eight device constraints, durations, block co-location and dependency order.
///
/// Events are taken in `(start, index)` order; events ending at or before a start time are
/// retired first, so back-to-back use of a resource is allowed.
pub fn validate<T: Scalar>(
    schedule: &TimedSchedule<T>,
    phi0: &IonAssignment,
    graph: &PositionGraph,
    dag: &BlockDag,
    timing: &TimingModel<T>,
) -> Vec<Violation> {
    let mut sweep = Sweep {
        graph,
        tol: T::lit(1e-6),
        out: Vec::new(),
    };
    let mut phi = phi0.clone();
    let mut order: Vec<usize> = (0..schedule.events.len()).collect();
    order.sort_by(|&a, &b| {
        schedule.events[a]
            .start
            .partial_cmp(&schedule.events[b].start)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut active: Vec<Active<T>> = Vec::new();
    let mut front = FrontState::new(dag, 0);
    let mut finished = vec![false; dag.len()];
    let mut started = vec![false; dag.len()];

    for &i in &order {
        let ev = &schedule.events[i];
        let t = ev.start;
        active.retain(|a| {
            if a.end <= t {
                if let Some(b) = a.block {
                    finished[b.index()] = true;
                }
                false
            } else {
                true
            }
        });
        if !(ev.end >= ev.start) {
            sweep.flag(
                t,
                i,
                ViolationKind::Duration,
                format!("ends at {} before it starts", ev.end),
            );
        }

        match &ev.instruction {
            Instruction::Shuttle(m) => {
                let expected = move_duration(m.kind, timing);
                if (ev.duration() - expected).abs() > sweep.tol {
                    sweep.flag(
                        t,
                        i,
                        ViolationKind::Duration,
                        format!(
                            "{} lasts {} instead of {expected}",
                            m.kind.name(),
                            ev.duration()
                        ),
                    );
                }
                if m.from.index() >= graph.num_nodes() || m.to.index() >= graph.num_nodes() {
                    sweep.flag(
                        t,
                        i,
                        ViolationKind::Replay,
                        format!("node out of range in {m}"),
                    );
                    continue;
                }
                if phi.qubit_at(m.from) != Some(m.qubit) {
                    sweep.flag(
                        t,
                        i,
                        ViolationKind::Replay,
                        format!("{} is not at {}", m.qubit, sweep.name(m.from)),
                    );
                    continue;
                }
                let edge = graph.edge_between(m.from, m.to);
                let label = edge.map(|e| e.label);
                let (from_trap, to_trap) = (graph.trap_of(m.from), graph.trap_of(m.to));
                match m.kind {
                    MoveKind::Split => {
                        if label != Some(EdgeLabel::MergeSplit) || !graph.is_trap_end(m.from) {
                            let msg = format!(
                                "split from {} to {} does not leave a trap end",
                                sweep.name(m.from),
                                sweep.name(m.to)
                            );
                            sweep.flag(
                                t,
                                i,
                                ViolationKind::Constraint(Constraint::SplitFromTrapEnd),
                                msg,
                            );
                        }
                    }
                    MoveKind::Merge => {
                        if label != Some(EdgeLabel::MergeSplit) || !graph.is_trap_end(m.to) {
                            let msg = format!(
                                "merge from {} to {} does not enter a trap end",
                                sweep.name(m.from),
                                sweep.name(m.to)
                            );
                            sweep.flag(
                                t,
                                i,
                                ViolationKind::Constraint(Constraint::MergeIntoTrapEnd),
                                msg,
                            );
                        }
                    }
                    MoveKind::Move => {
                        if label != Some(EdgeLabel::Move) {
                            let msg = format!(
                                "move {} -> {} shares no junction",
                                sweep.name(m.from),
                                sweep.name(m.to)
                            );
                            sweep.flag(
                                t,
                                i,
                                ViolationKind::Constraint(Constraint::MoveThroughJunction),
                                msg,
                            );
                        }
                    }
                    MoveKind::InnerSwap | MoveKind::Shift => {
                        if label != Some(EdgeLabel::Swap) {
                            let msg = format!(
                                "{} {} -> {} is not between neighbouring slots",
                                m.kind.name(),
                                sweep.name(m.from),
                                sweep.name(m.to)
                            );
                            sweep.flag(t, i, ViolationKind::Replay, msg);
                        }
                    }
                }

                let occupant = phi.qubit_at(m.to);
                match m.kind {
                    MoveKind::InnerSwap => {
                        if occupant.is_none() || occupant != m.other {
                            let msg = format!(
                                "swap partner {:?} is not at {}",
                                m.other,
                                sweep.name(m.to)
                            );
                            sweep.flag(t, i, ViolationKind::Replay, msg);
                        }
                    }
                    _ => {
                        if let Some(o) = occupant {
                            let c = if graph.is_segment(m.to) {
                                Constraint::SegmentOccupancy
                            } else {
                                Constraint::TrapCapacity
                            };
                            let msg =
                                format!("{} enters {} which holds {o}", m.qubit, sweep.name(m.to));
                            sweep.flag(t, i, ViolationKind::Constraint(c), msg);
                        }
                    }
                }
                if let Some(tr) = to_trap {
                    if from_trap != Some(tr)
                        && trap_load(&phi, graph, tr) >= graph.trap(tr).capacity
                    {
                        let msg = format!("trap {} is full", graph.trap(tr).id);
                        sweep.flag(
                            t,
                            i,
                            ViolationKind::Constraint(Constraint::TrapCapacity),
                            msg,
                        );
                    }
                }

                let junction = edge
                    .filter(|e| e.label == EdgeLabel::Move)
                    .and_then(|e| e.junction);
                let touched: Vec<usize> = [from_trap, to_trap].into_iter().flatten().collect();
                for a in &active {
                    if let Some(n) = a.nodes.iter().find(|n| **n == m.from || **n == m.to) {
                        let msg = format!(
                            "{} is held by event #{} until {}",
                            sweep.name(*n),
                            a.index,
                            a.end
                        );
                        sweep.flag(
                            t,
                            i,
                            ViolationKind::Constraint(Constraint::ShuttleCollision),
                            msg,
                        );
                    }
                    if junction.is_some() && a.junction == junction {
                        let msg = format!(
                            "junction {} is crossed by event #{} until {}",
                            junction.unwrap_or(0),
                            a.index,
                            a.end
                        );
                        sweep.flag(
                            t,
                            i,
                            ViolationKind::Constraint(Constraint::JunctionExclusive),
                            msg,
                        );
                    }
                    if a.traps
                        .iter()
                        .any(|&(tr, gate)| gate && touched.contains(&tr))
                    {
                        let msg = format!(
                            "shuttle touches a trap running gates for event #{}",
                            a.index
                        );
                        sweep.flag(
                            t,
                            i,
                            ViolationKind::Constraint(Constraint::GateParallelism),
                            msg,
                        );
                    }
                }

                // Apply regardless of violations so the sweep keeps following the trace.
                let q = m.qubit;
                let other = phi.qubit_at(m.to);
                let mut nodes = phi.placements().to_vec();
                nodes[q.index()] = m.to;
                if let Some(o) = other {
                    nodes[o.index()] = m.from;
                }
                if let Ok(next) = IonAssignment::with_nodes(graph.num_nodes(), nodes) {
                    phi = next;
                }
                active.push(Active {
                    end: ev.end,
                    index: i,
                    nodes: vec![m.from, m.to],
                    junction,
                    traps: touched.into_iter().map(|tr| (tr, false)).collect(),
                    block: None,
                });
            }
            Instruction::Execute { block, trap, perm } => {
                if block.index() >= dag.len() || *trap >= graph.traps().len() {
                    sweep.flag(
                        t,
                        i,
                        ViolationKind::Replay,
                        format!("unknown block {block} or trap {trap}"),
                    );
                    continue;
                }
                let b = dag.block(*block);
                let expected = timing.block_duration(b.one_qubit_gates, b.two_qubit_gates);
                if (ev.duration() - expected).abs() > sweep.tol {
                    sweep.flag(
                        t,
                        i,
                        ViolationKind::Duration,
                        format!("{block} lasts {} instead of {expected}", ev.duration()),
                    );
                }
                if started[block.index()] {
                    sweep.flag(
                        t,
                        i,
                        ViolationKind::BlockOrder,
                        format!("{block} runs twice"),
                    );
                }
                started[block.index()] = true;
                for p in dag.predecessors(*block) {
                    if !finished[p.index()] {
                        sweep.flag(
                            t,
                            i,
                            ViolationKind::BlockOrder,
                            format!("{block} starts before {p} finishes"),
                        );
                    }
                }
                let _ = front.advance_in_place(dag, *block);

                let info = graph.trap(*trap);
                if !info.is_executable() {
                    sweep.flag(
                        t,
                        i,
                        ViolationKind::CoLocation,
                        format!("trap {} cannot run gates", info.id),
                    );
                }
                for q in &b.qubits {
                    if graph.trap_of(phi.node_of(*q)) != Some(*trap) {
                        let msg = format!(
                            "{q} is at {}, outside trap {}",
                            sweep.name(phi.node_of(*q)),
                            info.id
                        );
                        sweep.flag(t, i, ViolationKind::CoLocation, msg);
                    }
                }
                let nodes: Vec<NodeId> = b.qubits.iter().map(|q| phi.node_of(*q)).collect();
                for a in &active {
                    if a.nodes.iter().any(|n| nodes.contains(n)) {
                        let msg = format!("{block} uses an ion still moving in event #{}", a.index);
                        sweep.flag(
                            t,
                            i,
                            ViolationKind::Constraint(Constraint::ShuttleCollision),
                            msg,
                        );
                    }
                    if a.traps.iter().any(|&(tr, _)| tr == *trap) {
                        let msg = format!("trap {} is busy with event #{}", info.id, a.index);
                        sweep.flag(
                            t,
                            i,
                            ViolationKind::Constraint(Constraint::GateParallelism),
                            msg,
                        );
                    }
                }
                if is_permutation(perm, b.width()) {
                    phi.permute(&b.qubits, perm);
                } else {
                    sweep.flag(
                        t,
                        i,
                        ViolationKind::Replay,
                        format!("{perm:?} is not a permutation"),
                    );
                }
                active.push(Active {
                    end: ev.end,
                    index: i,
                    nodes,
                    junction: None,
                    traps: vec![(*trap, true)],
                    block: Some(*block),
                });
            }
        }
    }

    let end = schedule
        .events
        .iter()
        .map(|e| e.end)
        .fold(T::zero(), |a, b| if b > a { b } else { a });
    if (end - schedule.makespan).abs() > sweep.tol {
        sweep.out.push(Violation {
            time: end.as_f64(),
            event: None,
            kind: ViolationKind::Duration,
            message: format!(
                "makespan {} differs from last event end {end}",
                schedule.makespan
            ),
        });
    }
    let missing = started.iter().filter(|s| !**s).count();
    if missing > 0 {
        sweep.out.push(Violation {
            time: end.as_f64(),
            event: None,
            kind: ViolationKind::BlockOrder,
            message: format!("{missing} blocks never run"),
        });
    }
    sweep.out
}
