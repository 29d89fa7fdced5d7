use std::collections::VecDeque;

use log::{debug, trace};

use super::escape::Work;
use super::{
    heuristic_score, select_permutation, BlockCostOracle, Instruction, InstructionList, RouteError,
    SearchConfig, TwoQubitGateCount,
};
use crate::arch::{DistanceMatrix, Edge, PositionGraph, TimingModel};
use crate::circuit::{Block, BlockDag, BlockId, FrontState};
use crate::num::Scalar;
use crate::state::{apply_move, executable_trap, legal_moves, IonAssignment, Move};

static DEFAULT_ORACLE: TwoQubitGateCount = TwoQubitGateCount;

/// Result of one routing pass.
#[derive(Clone, Debug, PartialEq)]
pub struct Routing {
    pub instructions: InstructionList,
    pub final_assignment: IonAssignment,
    /// Times the local-minimum escape ran.
    pub escapes: usize,
}

impl Routing {
    pub fn shuttle_count(&self) -> usize {
        self.instructions
            .iter()
            .filter(|i| i.as_move().is_some())
            .count()
    }
}

/// Everything the search needs about the device, bundled for one compilation.
pub struct Router<'a, T: Scalar = f64> {
    pub graph: &'a PositionGraph,
    pub dist: &'a DistanceMatrix<T>,
    pub timing: &'a TimingModel<T>,
    pub config: &'a SearchConfig<T>,
    pub(super) oracle: &'a dyn BlockCostOracle,
}

impl<'a, T: Scalar> Router<'a, T> {
    pub fn new(
        graph: &'a PositionGraph,
        dist: &'a DistanceMatrix<T>,
        timing: &'a TimingModel<T>,
        config: &'a SearchConfig<T>,
    ) -> Self {
        Router {
            graph,
            dist,
            timing,
            config,
            oracle: &DEFAULT_ORACLE,
        }
    }

    pub fn with_oracle(mut self, oracle: &'a dyn BlockCostOracle) -> Self {
        self.oracle = oracle;
        self
    }

    pub(super) fn weight(&self, e: &Edge) -> T {
        self.timing.edge_weight(e.label)
    }

    pub(super) fn recursion_depth(&self) -> usize {
        self.config
            .max_recursion_depth
            .unwrap_or(self.graph.num_segments())
    }

    fn stagnation_limit(&self) -> usize {
        self.config
            .stagnation_limit
            .unwrap_or(self.graph.num_nodes())
    }

    pub(super) fn score(&self, fs: &FrontState, dag: &BlockDag, phi: &IonAssignment) -> T {
        heuristic_score(
            fs.front(),
            fs.extended(),
            dag,
            phi,
            self.graph,
            self.dist,
            self.config.extended_weight,
        )
    }

    fn check_widths(&self, dag: &BlockDag) -> Result<(), RouteError> {
        let capacity = self.graph.max_executable_capacity();
        match dag.blocks().iter().find(|b| b.width() > capacity) {
            Some(b) => Err(RouteError::Unroutable {
                block: b.id,
                width: b.width(),
                capacity,
            }),
            None => Ok(()),
        }
    }

    /// Runs every front block that is executable right now, repeating until none is.
    fn execute_ready(
        &self,
        dag: &BlockDag,
        fs: &mut FrontState,
        phi: &mut IonAssignment,
        out: &mut InstructionList,
    ) -> usize {
        let mut executed = 0;
        loop {
            let ready = fs.front().iter().find_map(|&b| {
                executable_trap(phi, &dag.block(b).qubits, self.graph).map(|t| (b, t))
            });
            let Some((block, trap)) = ready else { break };
            let after = fs
                .advance(dag, block)
                .expect("block taken from the front layer");
            let b = dag.block(block);
            let perm = select_permutation(
                b,
                phi,
                &after,
                dag,
                self.graph,
                self.dist,
                self.config,
                self.oracle,
            );
            phi.permute(&b.qubits, &perm);
            trace!("execute {block} in trap {trap} perm {perm:?}");
            out.push(Instruction::Execute { block, trap, perm });
            *fs = after;
            executed += 1;
        }
        executed
    }

    /// The front block whose qubits are closest together.
    fn stuck_block(&self, dag: &BlockDag, fs: &FrontState, phi: &IonAssignment) -> BlockId {
        let spread = |b: BlockId| -> T {
            let nodes: Vec<_> = dag
                .block(b)
                .qubits
                .iter()
                .map(|q| phi.node_of(*q))
                .collect();
            let mut total = T::zero();
            for (i, &a) in nodes.iter().enumerate() {
                for &c in &nodes[i + 1..] {
                    total = total + self.dist.get(a, c);
                }
            }
            total
        };
        let mut best = fs.front()[0];
        let mut best_spread = spread(best);
        for &b in &fs.front()[1..] {
            let s = spread(b);
            if s < best_spread {
                best = b;
                best_spread = s;
            }
        }
        best
    }

    fn moves_cost<'m>(&self, moves: impl IntoIterator<Item = &'m Move>) -> T {
        moves
            .into_iter()
            .map(|m| crate::timeline::move_duration(m.kind, self.timing))
            .sum()
    }

    /// Runs the escape procedure alone: shuttles that bring every qubit of `block` into one
    /// executable trap, and the resulting assignment.
    pub fn colocate(
        &self,
        block: &Block,
        phi: &IonAssignment,
    ) -> Result<(Vec<Move>, IonAssignment), RouteError> {
        let mut work = Work::new(self, phi.clone());
        work.escape(block).map_err(|detail| RouteError::Deadlock {
            block: block.id,
            detail,
        })?;
        Ok((work.moves, work.phi))
    }

    /// Schedules `dag` starting from `phi0`.
    pub fn route(&self, dag: &BlockDag, phi0: &IonAssignment) -> Result<Routing, RouteError> {
        if phi0.num_qubits() != dag.num_qubits() {
            return Err(RouteError::QubitMismatch {
                assigned: phi0.num_qubits(),
                expected: dag.num_qubits(),
            });
        }
        self.check_widths(dag)?;
        let limit = 10_000 * dag.len().max(1);
        let stagnation = self.stagnation_limit();
        let mut fs = FrontState::new(dag, self.config.lookahead);
        let mut phi = phi0.clone();
        let mut streak_phi = phi0.clone();
        let mut out = InstructionList::new();
        let mut window: VecDeque<(Move, u64)> =
            VecDeque::with_capacity(self.config.cycle_window + 1);
        let mut shuttles = 0usize;
        let mut since_progress = 0usize;
        let mut escapes = 0usize;

        loop {
            if self.execute_ready(dag, &mut fs, &mut phi, &mut out) > 0 {
                window.clear();
                since_progress = 0;
                streak_phi = phi.clone();
            }
            if fs.is_done() {
                break;
            }
            if shuttles > limit {
                return Err(RouteError::Nontermination {
                    moves: shuttles,
                    limit,
                    remaining: dag.len() - fs.executed_count(),
                });
            }

            let mut best: Option<(T, Move, IonAssignment)> = None;
            for m in legal_moves(&phi, self.graph) {
                let next = apply_move(&phi, self.graph, &m).expect("legal move applies");
                let s = self.score(&fs, dag, &next);
                if !s.is_finite() {
                    continue;
                }
                if best.as_ref().is_none_or(|(bs, _, _)| s < *bs) {
                    best = Some((s, m, next));
                }
            }

            let current = self.score(&fs, dag, &phi);
            let mut escape = since_progress >= stagnation;
            if let Some((s, m, next)) = &best {
                if *s >= current {
                    escape = true;
                }
                let key = (*m, next.fingerprint());
                if window.contains(&key) {
                    escape = true;
                } else if !escape {
                    window.push_back(key);
                    if window.len() > self.config.cycle_window {
                        window.pop_front();
                    }
                }
            } else {
                escape = true;
            }

            if escape {
                let block = self.stuck_block(dag, &fs, &phi);
                debug!("escape for {block} after {since_progress} greedy moves");
                let mut work = Work::new(self, phi);
                let here = work.escape(dag.block(block));
                // The greedy streak executed nothing; escaping from where it began may be cheaper.
                let streak = out.len() - since_progress;
                let mut restart = None;
                if since_progress > 0 {
                    let mut fresh = Work::new(self, streak_phi.clone());
                    if fresh.escape(dag.block(block)).is_ok() {
                        let streak_cost =
                            self.moves_cost(out[streak..].iter().filter_map(Instruction::as_move));
                        if here.is_err()
                            || self.moves_cost(&fresh.moves)
                                < streak_cost + self.moves_cost(&work.moves)
                        {
                            restart = Some(fresh);
                        }
                    }
                }
                match restart {
                    Some(fresh) => {
                        out.truncate(streak);
                        work = fresh;
                    }
                    None => here.map_err(|detail| RouteError::Deadlock { block, detail })?,
                }
                shuttles += work.moves.len();
                out.extend(work.moves.into_iter().map(Instruction::Shuttle));
                phi = work.phi;
                streak_phi = phi.clone();
                escapes += 1;
                window.clear();
                since_progress = 0;
                continue;
            }

            let (_, m, next) = best.expect("non-escape path has a move");
            trace!("greedy {m}");
            out.push(Instruction::Shuttle(m));
            phi = next;
            shuttles += 1;
            since_progress += 1;
        }
        Ok(Routing {
            instructions: out,
            final_assignment: phi,
            escapes,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::{all_pairs_shuttle_cost, preset, NodeId};
    use crate::circuit::{partition_blocks, Circuit, GateKind};
    use crate::scheduler::replay;

    fn setup(name: &str, cap: usize) -> (PositionGraph, DistanceMatrix<f64>, TimingModel<f64>) {
        let g = PositionGraph::build(&preset(name, cap).unwrap()).unwrap();
        let t = TimingModel::<f64>::default();
        let d = all_pairs_shuttle_cost(&g, &t);
        (g, d, t)
    }

    #[test]
    fn already_executable_needs_no_shuttles() {
        let (g, d, t) = setup("MINI", 2);
        let cfg = SearchConfig::default();
        let r = Router::new(&g, &d, &t, &cfg);
        let mut c = Circuit::new(3);
        c.push(GateKind::Cx, &[], &[0, 1])
            .push(GateKind::H, &[], &[2]);
        let dag = partition_blocks(&c, 2).unwrap();
        let phi = IonAssignment::new(&g, [0, 1, 2].map(NodeId)).unwrap();
        let out = r.route(&dag, &phi).unwrap();
        assert_eq!(out.shuttle_count(), 0);
        assert_eq!(out.instructions.len(), 2);
        replay(&out.instructions, &phi, &g, &dag).unwrap();
    }

    #[test]
    fn mini_cross_trap_gate() {
        let (g, d, t) = setup("MINI", 2);
        let cfg = SearchConfig::default();
        let r = Router::new(&g, &d, &t, &cfg);
        let mut c = Circuit::new(3);
        c.push(GateKind::Cx, &[], &[0, 2]);
        let dag = partition_blocks(&c, 2).unwrap();
        for placement in [[0, 1, 2], [1, 0, 2], [0, 1, 3], [1, 0, 3], [0, 2, 3]] {
            let phi = IonAssignment::new(&g, placement.map(NodeId)).unwrap();
            let out = r.route(&dag, &phi).unwrap();
            replay(&out.instructions, &phi, &g, &dag).unwrap();
        }
    }

    #[test]
    fn rejects_wide_blocks() {
        let (g, d, t) = setup("MINI", 2);
        let cfg = SearchConfig::default();
        let r = Router::new(&g, &d, &t, &cfg);
        let mut c = Circuit::new(3);
        c.push(GateKind::Cx, &[], &[0, 1])
            .push(GateKind::Cx, &[], &[1, 2]);
        let dag = partition_blocks(&c, 3).unwrap();
        let phi = IonAssignment::new(&g, [0, 1, 2].map(NodeId)).unwrap();
        assert!(matches!(
            r.route(&dag, &phi),
            Err(RouteError::Unroutable { .. })
        ));
    }

    #[test]
    fn full_mini_cannot_cross_traps() {
        // With both traps full, an ion that splits out can only merge back where it came from.
        let (g, d, t) = setup("MINI", 2);
        let cfg = SearchConfig { search_budget: 10_000, ..SearchConfig::default() };
        let r = Router::new(&g, &d, &t, &cfg);
        let mut c = Circuit::new(4);
        c.push(GateKind::Cx, &[], &[0, 2]);
        let dag = partition_blocks(&c, 2).unwrap();
        let phi = IonAssignment::new(&g, [0, 1, 2, 3].map(NodeId)).unwrap();
        assert!(matches!(r.route(&dag, &phi), Err(RouteError::Deadlock { .. })));
    }

    #[test]
    fn h_device_qft_routes() {
        let (g, d, t) = setup("H", 3);
        let cfg = SearchConfig::default();
        let r = Router::new(&g, &d, &t, &cfg);
        let c = crate::circuit::generate(
            crate::circuit::GeneratorKind::Qft,
            10,
            0,
            &Default::default(),
        )
        .unwrap();
        let dag = partition_blocks(&c, 3).unwrap();
        let phi = IonAssignment::new(&g, (0..10).map(NodeId)).unwrap();
        let out = r.route(&dag, &phi).unwrap();
        replay(&out.instructions, &phi, &g, &dag).unwrap();
    }
}
