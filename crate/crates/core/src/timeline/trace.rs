use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{TimedEvent, TimedSchedule};
use crate::arch::{NodeId, PositionGraph, TimingModel, TrapId};
use crate::circuit::{BlockDag, BlockId};
use crate::num::Scalar;
use crate::scheduler::Instruction;
use crate::state::{AssignmentError, IonAssignment, Move, MoveKind, Qubit};

pub const TRACE_SCHEMA: &str = "ionroute.trace/v1";
pub const STATS_SCHEMA: &str = "ionroute.stats/v1";

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Split,
    Merge,
    Move,
    InnerSwap,
    Shift,
    Execute,
}

impl From<MoveKind> for EventKind {
    fn from(k: MoveKind) -> Self {
        match k {
            MoveKind::Split => EventKind::Split,
            MoveKind::Merge => EventKind::Merge,
            MoveKind::Move => EventKind::Move,
            MoveKind::InnerSwap => EventKind::InnerSwap,
            MoveKind::Shift => EventKind::Shift,
        }
    }
}

/// One timed event. Shuttles carry `from`/`to` node ids; executions carry the block, the
/// user-facing trap id and the permutation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub t_start: f64,
    pub t_end: f64,
    pub kind: EventKind,
    pub qubits: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trap: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perm: Option<Vec<usize>>,
}

/// Serialized timed schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub architecture: Option<String>,
    pub qubits: usize,
    /// Block width used for partitioning.
    pub k: usize,
    pub timing: TimingModel<f64>,
    /// Starting node of each qubit.
    pub initial: Vec<u32>,
    pub makespan: f64,
    pub events: Vec<TraceEvent>,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("malformed trace: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported trace schema {0:?}")]
    Schema(String),
    #[error("event {index}: {reason}")]
    Event { index: usize, reason: String },
    #[error("bad initial placement: {0}")]
    Assignment(#[from] AssignmentError),
}

impl Trace {
    pub fn from_schedule<T: Scalar>(
        schedule: &TimedSchedule<T>,
        phi0: &IonAssignment,
        graph: &PositionGraph,
        dag: &BlockDag,
        k: usize,
        timing: &TimingModel<T>,
    ) -> Trace {
        let events = schedule
            .events
            .iter()
            .map(|ev| {
                let (t_start, t_end) = (ev.start.as_f64(), ev.end.as_f64());
                match &ev.instruction {
                    Instruction::Shuttle(m) => TraceEvent {
                        t_start,
                        t_end,
                        kind: m.kind.into(),
                        qubits: m.qubits().map(|q| q.0).collect(),
                        from: Some(m.from.0),
                        to: Some(m.to.0),
                        block: None,
                        trap: None,
                        perm: None,
                    },
                    Instruction::Execute { block, trap, perm } => TraceEvent {
                        t_start,
                        t_end,
                        kind: EventKind::Execute,
                        qubits: dag.block(*block).qubits.iter().map(|q| q.0).collect(),
                        from: None,
                        to: None,
                        block: Some(block.0),
                        trap: Some(graph.trap(*trap).id.0),
                        perm: Some(perm.clone()),
                    },
                }
            })
            .collect();
        let f = |x: T| x.as_f64();
        Trace {
            schema: TRACE_SCHEMA.to_string(),
            architecture: None,
            qubits: phi0.num_qubits(),
            k,
            timing: TimingModel {
                split: f(timing.split),
                merge: f(timing.merge),
                move_: f(timing.move_),
                inner_swap: f(timing.inner_swap),
                gate_1q: f(timing.gate_1q),
                gate_2q: f(timing.gate_2q),
            },
            initial: phi0.placements().iter().map(|n| n.0).collect(),
            makespan: schedule.makespan.as_f64(),
            events,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json(text: &str) -> Result<Trace, TraceError> {
        let trace: Trace = serde_json::from_str(text)?;
        if trace.schema != TRACE_SCHEMA {
            return Err(TraceError::Schema(trace.schema));
        }
        Ok(trace)
    }

    /// Rebuilds the initial assignment and timed schedule against `graph`. Only structural
    /// problems are errors here; physical rules are left to the validator.
    pub fn to_schedule(
        &self,
        graph: &PositionGraph,
    ) -> Result<(IonAssignment, TimedSchedule), TraceError> {
        if self.initial.len() != self.qubits {
            return Err(TraceError::Event {
                index: 0,
                reason: format!(
                    "{} initial nodes for {} qubits",
                    self.initial.len(),
                    self.qubits
                ),
            });
        }
        let phi0 = IonAssignment::new(graph, self.initial.iter().map(|&n| NodeId(n)))?;
        let mut events = Vec::with_capacity(self.events.len());
        for (index, ev) in self.events.iter().enumerate() {
            let err = |reason: &str| TraceError::Event {
                index,
                reason: reason.to_string(),
            };
            let qubit = |i: usize| -> Result<Qubit, TraceError> {
                let q = *ev.qubits.get(i).ok_or_else(|| err("missing qubit"))?;
                if q as usize >= self.qubits {
                    return Err(err("qubit out of range"));
                }
                Ok(Qubit(q))
            };
            let instruction = match ev.kind {
                EventKind::Execute => {
                    let id = ev.trap.ok_or_else(|| err("execute without trap"))?;
                    let trap = graph
                        .trap_index(TrapId(id))
                        .ok_or_else(|| err("unknown trap"))?;
                    let block = BlockId(ev.block.ok_or_else(|| err("execute without block"))?);
                    let perm = ev.perm.clone().ok_or_else(|| err("execute without perm"))?;
                    Instruction::Execute { block, trap, perm }
                }
                kind => {
                    let kind = match kind {
                        EventKind::Split => MoveKind::Split,
                        EventKind::Merge => MoveKind::Merge,
                        EventKind::Move => MoveKind::Move,
                        EventKind::InnerSwap => MoveKind::InnerSwap,
                        _ => MoveKind::Shift,
                    };
                    let from = ev.from.ok_or_else(|| err("shuttle without from"))?;
                    let to = ev.to.ok_or_else(|| err("shuttle without to"))?;
                    let other = if kind == MoveKind::InnerSwap {
                        Some(qubit(1)?)
                    } else {
                        None
                    };
                    Instruction::Shuttle(Move {
                        kind,
                        from: NodeId(from),
                        to: NodeId(to),
                        qubit: qubit(0)?,
                        other,
                    })
                }
            };
            events.push(TimedEvent {
                instruction,
                start: ev.t_start,
                end: ev.t_end,
            });
        }
        Ok((
            phi0,
            TimedSchedule {
                events,
                makespan: self.makespan,
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::{preset, PositionGraph};
    use crate::circuit::{partition_blocks, Circuit, GateKind};
    use crate::timeline::schedule;

    #[test]
    fn round_trip() {
        let g = PositionGraph::build(&preset("MINI", 2).unwrap()).unwrap();
        let mut c = Circuit::new(2);
        c.push(GateKind::Cx, &[], &[0, 1]);
        let dag = partition_blocks(&c, 2).unwrap();
        let phi = IonAssignment::new(&g, [1, 2].map(NodeId)).unwrap();
        let m = |kind, from, to| {
            Instruction::Shuttle(Move {
                kind,
                from: NodeId(from),
                to: NodeId(to),
                qubit: Qubit(1),
                other: None,
            })
        };
        let instrs = vec![
            m(MoveKind::Split, 2, 5),
            m(MoveKind::Move, 5, 4),
            m(MoveKind::Merge, 4, 0),
            Instruction::Execute {
                block: BlockId(0),
                trap: 0,
                perm: vec![0, 1],
            },
        ];
        let timing = TimingModel::default();
        let ts = schedule(&instrs, &phi, &g, &dag, &timing).unwrap();
        let trace = Trace::from_schedule(&ts, &phi, &g, &dag, 2, &timing);
        let text = trace.to_json();
        let back = Trace::from_json(&text).unwrap();
        assert_eq!(back, trace);
        let (phi_back, ts_back) = back.to_schedule(&g).unwrap();
        assert_eq!(phi_back, phi);
        assert_eq!(ts_back, ts);
        assert_eq!(ts.makespan, 360.0);
    }

    #[test]
    fn rejects_foreign_schema_and_unknown_trap() {
        assert!(matches!(
            Trace::from_json(r#"{"schema":"x"}"#),
            Err(TraceError::Json(_))
        ));
        let g = PositionGraph::build(&preset("MINI", 2).unwrap()).unwrap();
        let trace = Trace {
            schema: TRACE_SCHEMA.into(),
            architecture: None,
            qubits: 0,
            k: 2,
            timing: TimingModel::default(),
            initial: vec![],
            makespan: 0.0,
            events: vec![TraceEvent {
                t_start: 0.0,
                t_end: 0.0,
                kind: EventKind::Execute,
                qubits: vec![],
                from: None,
                to: None,
                block: Some(0),
                trap: Some(99),
                perm: Some(vec![]),
            }],
        };
        assert!(matches!(
            trace.to_schedule(&g),
            Err(TraceError::Event { index: 0, .. })
        ));
        let mut other = trace.clone();
        other.schema = "ionroute.trace/v0".into();
        assert!(matches!(
            Trace::from_json(&other.to_json()),
            Err(TraceError::Schema(_))
        ));
    }
}
