//! Shuttling-aware compiler for trapped-ion QCCD devices.
//!
//! The device is encoded as a position graph whose nodes are trap slots and segments. A
//! circuit is partitioned into blocks of at most `k` qubits, and a heuristic search moves
//! ions over the graph until each block's qubits share an executable trap. The resulting
//! instruction list is turned into a timed parallel schedule and checked against the device
//! rules.
//!
//! All time-like quantities are generic over [`num::Scalar`] (`f32` or `f64`); the aliases
//! below fix them to `f64`.

pub mod arch;
pub mod bench;
pub mod circuit;
pub mod compile;
pub mod num;
pub mod scheduler;
pub mod state;
pub mod timeline;

pub use compile::{compile, CompileError, CompileOptions};

pub type Timing = arch::TimingModel<f64>;
pub type Distances = arch::DistanceMatrix<f64>;
pub type Config = scheduler::SearchConfig<f64>;
pub type Options = compile::CompileOptions<f64>;
pub type Output = compile::Compilation<f64>;
pub type Schedule = timeline::TimedSchedule<f64>;
pub type Stats = timeline::ScheduleStats<f64>;
