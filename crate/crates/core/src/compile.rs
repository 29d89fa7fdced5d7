//! End-to-end pipeline: device graph, block partition, layout, routing and timed schedule.

use log::info;
use thiserror::Error;

use crate::arch::{
    all_pairs_shuttle_cost, ArchError, ArchitectureSpec, DistanceMatrix, PositionGraph, TimingModel,
};
use crate::circuit::{partition_blocks, BlockDag, Circuit, CircuitError, PartitionError};
use crate::num::Scalar;
use crate::scheduler::{RouteError, Router, Routing, SearchConfig};
use crate::state::IonAssignment;
use crate::timeline::{
    schedule, stats, validate, ScheduleError, ScheduleStats, TimedSchedule, Trace, Violation,
};

#[derive(Clone, Debug, PartialEq)]
pub struct CompileOptions<T: Scalar = f64> {
    /// Maximum block width; `None` picks `min(3, largest executable trap)`.
    pub k: Option<usize>,
    pub config: SearchConfig<T>,
    pub timing: TimingModel<T>,
}

impl<T: Scalar> Default for CompileOptions<T> {
    fn default() -> Self {
        CompileOptions {
            k: None,
            config: SearchConfig::default(),
            timing: TimingModel::default(),
        }
    }
}

impl<T: Scalar> CompileOptions<T> {
    pub fn shaper() -> Self {
        Self::default()
    }

    pub fn shaw() -> Self {
        CompileOptions {
            config: SearchConfig::shaw(),
            ..Self::default()
        }
    }
}

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("architecture: {0}")]
    Arch(#[from] ArchError),
    #[error("circuit: {0}")]
    Circuit(#[from] CircuitError),
    #[error("{qubits} qubits do not fit into {slots} trap slots")]
    CapacityExceeded { qubits: usize, slots: usize },
    #[error(
        "block width {k} is invalid for a device whose largest executable trap holds {capacity}"
    )]
    BlockWidth { k: usize, capacity: usize },
    #[error("partition: {0}")]
    Partition(#[from] PartitionError),
    #[error("configuration: {0}")]
    Config(String),
    #[error("routing: {0}")]
    Route(RouteError),
    #[error("scheduling: {0}")]
    Schedule(#[from] ScheduleError),
}

impl From<RouteError> for CompileError {
    fn from(e: RouteError) -> Self {
        match e {
            RouteError::CapacityExceeded { qubits, slots } => {
                CompileError::CapacityExceeded { qubits, slots }
            }
            other => CompileError::Route(other),
        }
    }
}

/// Output of [`compile`].
#[derive(Clone, Debug)]
pub struct Compilation<T: Scalar = f64> {
    pub graph: PositionGraph,
    pub distances: DistanceMatrix<T>,
    pub k: usize,
    pub dag: BlockDag,
    pub initial: IonAssignment,
    pub routing: Routing,
    pub schedule: TimedSchedule<T>,
    pub stats: ScheduleStats<T>,
    /// Independent validation of `schedule`; empty for a correct compilation.
    pub violations: Vec<Violation>,
    pub timing: TimingModel<T>,
}

impl<T: Scalar> Compilation<T> {
    pub fn trace(&self) -> Trace {
        Trace::from_schedule(
            &self.schedule,
            &self.initial,
            &self.graph,
            &self.dag,
            self.k,
            &self.timing,
        )
    }
}

/// Default block width for a device.
pub fn default_block_width(graph: &PositionGraph) -> usize {
    graph.max_executable_capacity().clamp(1, 3)
}

pub fn compile<T: Scalar>(
    circuit: &Circuit,
    spec: &ArchitectureSpec,
    opts: &CompileOptions<T>,
) -> Result<Compilation<T>, CompileError> {
    opts.timing.validate()?;
    opts.config.validate().map_err(CompileError::Config)?;
    circuit.validate()?;
    let graph = PositionGraph::build(spec)?;
    let slots = graph.total_trap_capacity();
    if circuit.num_qubits > slots {
        return Err(CompileError::CapacityExceeded {
            qubits: circuit.num_qubits,
            slots,
        });
    }
    let capacity = graph.max_executable_capacity();
    let k = opts.k.unwrap_or_else(|| default_block_width(&graph));
    if k == 0 || k > capacity {
        return Err(CompileError::BlockWidth { k, capacity });
    }
    let dag = partition_blocks(circuit, k)?;
    let distances = all_pairs_shuttle_cost(&graph, &opts.timing);
    let router = Router::new(&graph, &distances, &opts.timing, &opts.config);
    let initial = router.initial_layout(&dag)?;
    let routing = router.route(&dag, &initial)?;
    let timed = schedule(&routing.instructions, &initial, &graph, &dag, &opts.timing)?;
    let violations = validate(&timed, &initial, &graph, &dag, &opts.timing);
    let stats = stats(&timed);
    info!(
        "compiled {} blocks with {} shuttles ({} escapes), makespan {}",
        dag.len(),
        routing.shuttle_count(),
        routing.escapes,
        timed.makespan
    );
    Ok(Compilation {
        graph,
        distances,
        k,
        dag,
        initial,
        routing,
        schedule: timed,
        stats,
        violations,
        timing: opts.timing.clone(),
    })
}
