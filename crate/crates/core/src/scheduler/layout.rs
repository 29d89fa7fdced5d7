use log::{debug, warn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{RouteError, Router};
use crate::arch::NodeId;
use crate::circuit::BlockDag;
use crate::num::Scalar;
use crate::state::IonAssignment;

impl<T: Scalar> Router<'_, T> {
    /// Seeded random placement: qubits fill shuffled executable slots first, then storage.
    pub fn random_placement(
        &self,
        num_qubits: usize,
        seed: u64,
    ) -> Result<IonAssignment, RouteError> {
        let g = self.graph;
        let slots = g.total_trap_capacity();
        if num_qubits > slots {
            return Err(RouteError::CapacityExceeded {
                qubits: num_qubits,
                slots,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut exec: Vec<NodeId> = g
            .traps()
            .iter()
            .filter(|t| t.is_executable())
            .flat_map(|t| t.slots())
            .collect();
        let mut storage: Vec<NodeId> = g
            .traps()
            .iter()
            .filter(|t| !t.is_executable())
            .flat_map(|t| t.slots())
            .collect();
        exec.shuffle(&mut rng);
        storage.shuffle(&mut rng);
        exec.extend(storage);
        exec.truncate(num_qubits);
        Ok(IonAssignment::new(g, exec).expect("distinct slots"))
    }

    /// Starting assignment for the final forward pass: a seeded random placement refined by
    /// `layout_passes - 1` alternating routing passes, the last of them over the reversed
    /// circuit.
    pub fn initial_layout(&self, dag: &BlockDag) -> Result<IonAssignment, RouteError> {
        let mut phi = self.random_placement(dag.num_qubits(), self.config.seed)?;
        let preliminary = self.config.layout_passes.saturating_sub(1);
        if preliminary == 0 {
            return Ok(phi);
        }
        let reversed = dag.reversed();
        for pass in 0..preliminary {
            let backwards = (preliminary - 1 - pass).is_multiple_of(2);
            let d = if backwards { &reversed } else { dag };
            match self.route(d, &phi) {
                Ok(r) => {
                    debug!(
                        "layout pass {pass} ({}) used {} shuttles",
                        if backwards { "reverse" } else { "forward" },
                        r.shuttle_count()
                    );
                    phi = r.final_assignment;
                }
                Err(e @ RouteError::Unroutable { .. }) => return Err(e),
                Err(e) => {
                    warn!("layout pass {pass} failed ({e}); keeping the previous placement");
                    break;
                }
            }
        }
        Ok(phi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::{all_pairs_shuttle_cost, preset, PositionGraph, TimingModel};
    use crate::circuit::{partition_blocks, Circuit, GateKind};
    use crate::scheduler::SearchConfig;

    #[test]
    fn seeded_and_injective() {
        let g = PositionGraph::build(&preset("H", 3).unwrap()).unwrap();
        let t = TimingModel::<f64>::default();
        let d = all_pairs_shuttle_cost(&g, &t);
        let cfg = SearchConfig {
            seed: 11,
            layout_passes: 1,
            ..SearchConfig::default()
        };
        let r = Router::new(&g, &d, &t, &cfg);
        let mut c = Circuit::new(10);
        c.push(GateKind::Cx, &[], &[0, 9]);
        let dag = partition_blocks(&c, 3).unwrap();
        let a = r.initial_layout(&dag).unwrap();
        assert_eq!(a, r.initial_layout(&dag).unwrap());
        assert_eq!(a.occupied_count(), 10);
        assert!(a.placements().iter().all(|n| g.trap_of(*n).is_some()));
    }

    #[test]
    fn too_many_qubits() {
        let g = PositionGraph::build(&preset("MINI", 2).unwrap()).unwrap();
        let t = TimingModel::<f64>::default();
        let d = all_pairs_shuttle_cost(&g, &t);
        let cfg = SearchConfig::default();
        let r = Router::new(&g, &d, &t, &cfg);
        let dag = partition_blocks(&Circuit::new(5), 2).unwrap();
        assert_eq!(
            r.initial_layout(&dag),
            Err(RouteError::CapacityExceeded {
                qubits: 5,
                slots: 4
            })
        );
    }

    #[test]
    fn two_ion_layout_colocates_the_pair() {
        // One gate on two ions: the reverse pass ends with both in one trap.
        let g = PositionGraph::build(&preset("MINI", 2).unwrap()).unwrap();
        let t = TimingModel::<f64>::default();
        let d = all_pairs_shuttle_cost(&g, &t);
        let mut c = Circuit::new(2);
        c.push(GateKind::Cx, &[], &[0, 1]);
        let dag = partition_blocks(&c, 2).unwrap();
        for seed in 0..20 {
            let cfg = SearchConfig {
                seed,
                ..SearchConfig::default()
            };
            let r = Router::new(&g, &d, &t, &cfg);
            let phi0 = r.initial_layout(&dag).unwrap();
            assert_eq!(
                r.route(&dag, &phi0).unwrap().shuttle_count(),
                0,
                "seed {seed}"
            );
        }
    }
}
