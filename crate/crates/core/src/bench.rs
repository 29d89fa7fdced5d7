//! Side-by-side comparison of the permutation-aware search and its identity-permutation
//! variant over a grid of circuits and devices.

use std::fmt::Write as _;

use serde::Serialize;

use crate::arch::{preset, TimingModel};
use crate::circuit::{generate, GeneratorKind, GeneratorParams};
use crate::compile::{compile, CompileError, CompileOptions};
use crate::scheduler::SearchConfig;

/// Printed with every comparison table.
pub const NOTICE: &str = "absolute shuttle makespans depend on the timing model and circuit generators used here and \
are not comparable with published microsecond figures; compare the two columns relative to each other";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BenchCell {
    pub kind: GeneratorKind,
    pub arch: String,
    pub qubits: usize,
    pub capacity: usize,
}

/// The standard grid: every generator at 16 qubits on H {4, 5} and G2x3 {3, 4}, and at
/// 20 qubits on H {5, 6} and G2x3 {4, 5}.
pub fn default_cells() -> Vec<BenchCell> {
    let points: [(usize, &str, usize); 8] = [
        (16, "H", 4),
        (16, "H", 5),
        (16, "G2x3", 3),
        (16, "G2x3", 4),
        (20, "H", 5),
        (20, "H", 6),
        (20, "G2x3", 4),
        (20, "G2x3", 5),
    ];
    GeneratorKind::ALL
        .iter()
        .flat_map(|&kind| {
            points
                .iter()
                .map(move |&(qubits, arch, capacity)| BenchCell {
                    kind,
                    arch: arch.to_string(),
                    qubits,
                    capacity,
                })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    /// Layout seeds tried per algorithm; the best shuttle makespan is kept.
    pub seeds: u64,
    /// Seed of the circuit generator.
    pub circuit_seed: u64,
    pub timing: TimingModel<f64>,
    pub params: GeneratorParams,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            seeds: 5,
            circuit_seed: 0,
            timing: TimingModel::default(),
            params: GeneratorParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlgoResult {
    /// End of the last shuttle; the figure the comparison is made on.
    pub shuttle_makespan: f64,
    pub makespan: f64,
    pub sp: f64,
    pub shuttles: usize,
    pub seed: u64,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub cell: BenchCell,
    pub shaper: AlgoResult,
    pub shaw: AlgoResult,
}

impl BenchRow {
    /// SHAPER shuttle makespan over SHAW shuttle makespan.
    pub fn ratio(&self) -> f64 {
        self.shaper.shuttle_makespan / self.shaw.shuttle_makespan
    }
}

fn best_of(
    cell: &BenchCell,
    circuit: &crate::circuit::Circuit,
    base: SearchConfig<f64>,
    opts: &BenchOptions,
) -> Result<AlgoResult, CompileError> {
    let spec = preset(&cell.arch, cell.capacity)?;
    let mut best: Option<AlgoResult> = None;
    for seed in 0..opts.seeds.max(1) {
        let co = CompileOptions {
            k: None,
            config: base.clone().with_seed(seed),
            timing: opts.timing.clone(),
        };
        let out = compile(circuit, &spec, &co)?;
        let r = AlgoResult {
            shuttle_makespan: out.stats.shuttle_makespan,
            makespan: out.stats.makespan,
            sp: out.stats.sp,
            shuttles: out.routing.shuttle_count(),
            seed,
            violations: out.violations.len(),
        };
        if best
            .as_ref()
            .is_none_or(|b| r.shuttle_makespan < b.shuttle_makespan)
        {
            best = Some(r);
        }
    }
    Ok(best.expect("at least one seed"))
}

pub fn run_cell(cell: &BenchCell, opts: &BenchOptions) -> Result<BenchRow, CompileError> {
    let circuit = generate(cell.kind, cell.qubits, opts.circuit_seed, &opts.params)
        .map_err(|e| CompileError::Config(e.to_string()))?;
    Ok(BenchRow {
        cell: cell.clone(),
        shaper: best_of(cell, &circuit, SearchConfig::shaper(), opts)?,
        shaw: best_of(cell, &circuit, SearchConfig::shaw(), opts)?,
    })
}

/// Runs every cell, one thread per cell.
pub fn run(cells: &[BenchCell], opts: &BenchOptions) -> Vec<Result<BenchRow, CompileError>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = cells
            .iter()
            .map(|c| s.spawn(move || run_cell(c, opts)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("bench worker panicked"))
            .collect()
    })
}

/// Plain-text comparison table of shuttle makespans followed by a summary line and the notice.
pub fn format_table(rows: &[BenchRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<8} {:<5} {:>3} {:>3} {:>12} {:>6} {:>12} {:>6} {:>7}",
        "circuit", "arch", "n", "cap", "shaper_us", "sp", "shaw_us", "sp", "ratio"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<8} {:<5} {:>3} {:>3} {:>12.1} {:>6.3} {:>12.1} {:>6.3} {:>7.3}",
            r.cell.kind.name(),
            r.cell.arch,
            r.cell.qubits,
            r.cell.capacity,
            r.shaper.shuttle_makespan,
            r.shaper.sp,
            r.shaw.shuttle_makespan,
            r.shaw.sp,
            r.ratio()
        );
    }
    let within = rows.iter().filter(|r| r.ratio() <= 1.1).count();
    let _ = writeln!(
        out,
        "shaper within 1.1x of shaw on {within}/{} cells",
        rows.len()
    );
    let _ = writeln!(out, "note: {NOTICE}");
    out
}
