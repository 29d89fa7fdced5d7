use std::collections::HashMap;

use itertools::Itertools;

use super::heuristic_score;
use super::SearchConfig;
use crate::arch::{DistanceMatrix, PositionGraph};
use crate::circuit::{Block, BlockDag, BlockId, FrontState};
use crate::num::Scalar;
use crate::state::IonAssignment;

/// Cost of executing a block under a qubit permutation, e.g. a gate count after re-synthesis.
pub trait BlockCostOracle: Sync {
    fn cost(&self, block: &Block, perm: &[usize]) -> f64;
}

/// Two-qubit gate count of the block, independent of the permutation.
#[derive(Copy, Clone, Debug, Default)]
pub struct TwoQubitGateCount;

impl BlockCostOracle for TwoQubitGateCount {
    fn cost(&self, block: &Block, _perm: &[usize]) -> f64 {
        block.two_qubit_gates as f64
    }
}

/// Externally supplied per-(block, permutation) costs; missing entries fall back to the
/// two-qubit gate count.
#[derive(Clone, Debug, Default)]
pub struct CostTable {
    entries: HashMap<(BlockId, Vec<usize>), f64>,
}

impl CostTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, block: BlockId, perm: Vec<usize>, cost: f64) {
        self.entries.insert((block, perm), cost);
    }
}

impl BlockCostOracle for CostTable {
    fn cost(&self, block: &Block, perm: &[usize]) -> f64 {
        self.entries
            .get(&(block.id, perm.to_vec()))
            .copied()
            .unwrap_or_else(|| TwoQubitGateCount.cost(block, perm))
    }
}

/// Picks the permutation for `block`, which must be executable under `phi`. Candidates are
/// compared by oracle cost, then by the heuristic of the relabelled assignment against the
/// front state after the block, then lexicographically.
#[allow(clippy::too_many_arguments)]
pub fn select_permutation<T: Scalar>(
    block: &Block,
    phi: &IonAssignment,
    after: &FrontState,
    dag: &BlockDag,
    graph: &PositionGraph,
    dist: &DistanceMatrix<T>,
    config: &SearchConfig<T>,
    oracle: &dyn BlockCostOracle,
) -> Vec<usize> {
    let width = block.width();
    let identity: Vec<usize> = (0..width).collect();
    if !config.permutation_enabled || width < 2 {
        return identity;
    }
    let mut best: Option<(f64, T, Vec<usize>)> = None;
    for perm in (0..width).permutations(width) {
        let cost = oracle.cost(block, &perm);
        let mut relabelled = phi.clone();
        relabelled.permute(&block.qubits, &perm);
        let h = heuristic_score(
            after.front(),
            after.extended(),
            dag,
            &relabelled,
            graph,
            dist,
            config.extended_weight,
        );
        let better = match &best {
            None => true,
            Some((bc, bh, _)) => cost < *bc || (cost == *bc && h < *bh),
        };
        if better {
            best = Some((cost, h, perm));
        }
    }
    best.map(|(_, _, p)| p).unwrap_or(identity)
}
