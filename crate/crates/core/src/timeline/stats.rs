use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::TimedSchedule;
use crate::num::Scalar;
use crate::scheduler::Instruction;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ScheduleStats<T = f64> {
    /// End of the last event, gates included.
    pub makespan: T,
    /// End of the last shuttle event.
    pub shuttle_makespan: T,
    /// Sum of all shuttle durations.
    pub shuttle_busy: T,
    /// Sum of split, move and merge durations.
    pub transport_busy: T,
    /// `transport_busy / shuttle_busy`, or 0 without shuttles.
    pub sp: T,
    /// Event counts by kind (`split`, `merge`, `move`, `inner_swap`, `shift`, `execute`).
    pub counts: BTreeMap<String, usize>,
    /// Summed block durations over the makespan.
    pub gate_parallelism: T,
}

pub fn stats<T: Scalar>(schedule: &TimedSchedule<T>) -> ScheduleStats<T> {
    let mut counts = BTreeMap::new();
    let mut shuttle_busy = T::zero();
    let mut transport_busy = T::zero();
    let mut gate_busy = T::zero();
    let mut shuttle_makespan = T::zero();
    for ev in &schedule.events {
        let d = ev.duration();
        let name = match &ev.instruction {
            Instruction::Shuttle(m) => {
                shuttle_busy = shuttle_busy + d;
                if m.kind.is_transport() {
                    transport_busy = transport_busy + d;
                }
                if ev.end > shuttle_makespan {
                    shuttle_makespan = ev.end;
                }
                m.kind.name()
            }
            Instruction::Execute { .. } => {
                gate_busy = gate_busy + d;
                "execute"
            }
        };
        *counts.entry(name.to_string()).or_insert(0) += 1;
    }
    let ratio = |a: T, b: T| if b > T::zero() { a / b } else { T::zero() };
    ScheduleStats {
        makespan: schedule.makespan,
        shuttle_makespan,
        shuttle_busy,
        transport_busy,
        sp: ratio(transport_busy, shuttle_busy),
        counts,
        gate_parallelism: ratio(gate_busy, schedule.makespan),
    }
}
