mod common;

use std::collections::{HashSet, VecDeque};

use common::{random_arch, random_circuit, rng, ArchParams};
use ionroute::arch::{all_pairs_shuttle_cost, preset, NodeId, PositionGraph, TimingModel};
use ionroute::circuit::{partition_blocks, BlockId, FrontState};
use ionroute::scheduler::{replay, Router, SearchConfig};
use ionroute::state::{apply_move, legal_moves, IonAssignment};
use ionroute::timeline::{schedule, validate};
use proptest::prelude::*;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

fn random_state(seed: u64) -> (PositionGraph, IonAssignment) {
    let mut r = rng(seed);
    let g = PositionGraph::build(&random_arch(&mut r, &ArchParams::WIDE)).unwrap();
    let mut nodes: Vec<NodeId> = g.nodes().collect();
    nodes.shuffle(&mut r);
    let n = r.random_range(1..=nodes.len());
    let phi = IonAssignment::new(&g, nodes[..n].iter().copied()).unwrap();
    (g, phi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn partition_respects_width_order_and_acyclicity(seed in any::<u64>(), n in 2usize..10, gates in 0usize..40, k in 2usize..5) {
        let mut r = rng(seed);
        let c = random_circuit(&mut r, n, gates);
        let dag = partition_blocks(&c, k).unwrap();

        let mut owner = vec![None; c.gates.len()];
        for b in dag.blocks() {
            prop_assert!(b.width() <= k);
            for &gi in &b.gates {
                prop_assert!(owner[gi].is_none(), "gate {} in two blocks", gi);
                owner[gi] = Some(b.id);
                prop_assert!(c.gates[gi].qubits.iter().all(|q| b.qubits.contains(q)));
            }
        }
        prop_assert!(owner.iter().all(Option::is_some));

        // Kahn's algorithm over the predecessor lists visits every block exactly when acyclic.
        let mut indegree: Vec<usize> = dag.blocks().iter().map(|b| dag.predecessors(b.id).len()).collect();
        let mut queue: VecDeque<BlockId> = dag.blocks().iter().filter(|b| indegree[b.id.index()] == 0).map(|b| b.id).collect();
        let mut rank = vec![usize::MAX; dag.len()];
        let mut next = 0;
        while let Some(b) = queue.pop_front() {
            rank[b.index()] = next;
            next += 1;
            for &s in dag.successors(b) {
                indegree[s.index()] -= 1;
                if indegree[s.index()] == 0 {
                    queue.push_back(s);
                }
            }
        }
        prop_assert_eq!(next, dag.len());

        // Gates sharing a qubit keep their circuit order across blocks.
        let mut reachable = vec![HashSet::new(); dag.len()];
        let mut by_rank: Vec<BlockId> = dag.blocks().iter().map(|b| b.id).collect();
        by_rank.sort_by_key(|b| rank[b.index()]);
        for &b in &by_rank {
            for &p in dag.predecessors(b) {
                let mut inherited = reachable[p.index()].clone();
                inherited.insert(p);
                reachable[b.index()].extend(inherited);
            }
        }
        for q in 0..n {
            let on_q: Vec<usize> = (0..c.gates.len()).filter(|&i| c.gates[i].qubits.iter().any(|x| x.0 as usize == q)).collect();
            for w in on_q.windows(2) {
                let (a, b) = (owner[w[0]].unwrap(), owner[w[1]].unwrap());
                prop_assert!(a == b || reachable[b.index()].contains(&a), "gates {} and {} out of order", w[0], w[1]);
            }
        }
    }

    #[test]
    fn front_state_yields_topological_orders(seed in any::<u64>(), n in 2usize..10, gates in 1usize..40, lookahead in 0usize..6) {
        let mut r = rng(seed);
        let c = random_circuit(&mut r, n, gates);
        let dag = partition_blocks(&c, 3).unwrap();
        let mut fs = FrontState::new(&dag, lookahead);
        let mut done = vec![false; dag.len()];
        while !fs.is_done() {
            prop_assert!(fs.extended().len() <= lookahead);
            prop_assert!(fs.extended().iter().all(|b| !fs.front().contains(b) && !done[b.index()]));
            let b = *fs.front().choose(&mut r).unwrap();
            prop_assert!(dag.predecessors(b).iter().all(|p| done[p.index()]));
            fs.advance_in_place(&dag, b).unwrap();
            done[b.index()] = true;
        }
        prop_assert!(done.iter().all(|&d| d));
    }

    #[test]
    fn legal_moves_conserve_ions_and_reverse(seed in any::<u64>()) {
        let (g, phi) = random_state(seed);
        for m in legal_moves(&phi, &g) {
            let next = apply_move(&phi, &g, &m).unwrap();
            prop_assert_eq!(next.num_qubits(), phi.num_qubits());
            prop_assert_eq!(next.occupied_count(), phi.num_qubits());
            let distinct: HashSet<NodeId> = next.placements().iter().copied().collect();
            prop_assert_eq!(distinct.len(), phi.num_qubits());
            let back = legal_moves(&next, &g).into_iter().any(|b| apply_move(&next, &g, &b).unwrap() == phi);
            prop_assert!(back, "{} cannot be undone", m);
        }
    }

    #[test]
    fn distances_are_a_metric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = PositionGraph::build(&random_arch(&mut r, &ArchParams::WIDE)).unwrap();
        let timing = TimingModel::<f64> { split: r.random_range(1.0..200.0), merge: r.random_range(1.0..200.0), ..TimingModel::default() };
        let d = all_pairs_shuttle_cost(&g, &timing);
        for u in g.nodes() {
            prop_assert_eq!(d.get(u, u), 0.0);
            for v in g.nodes() {
                prop_assert_eq!(d.get(u, v), d.get(v, u));
                prop_assert!(d.get(u, v).is_finite());
                for w in g.nodes() {
                    prop_assert!(d.get(u, w) <= d.get(u, v) + d.get(v, w) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn routed_schedules_validate(seed in any::<u64>()) {
        let mut r = rng(seed);
        let spec = random_arch(&mut r, &ArchParams::FUZZ);
        let g = PositionGraph::build(&spec).unwrap();
        let slots = g.total_trap_capacity();
        let n = r.random_range(2..=8usize.min(slots - 1));
        let gates = r.random_range(1..=25);
        let c = random_circuit(&mut r, n, gates);
        let k = g.max_executable_capacity().min(3);
        let dag = partition_blocks(&c, k).unwrap();
        let timing = TimingModel::<f64>::default();
        let d = all_pairs_shuttle_cost(&g, &timing);
        let cfg = SearchConfig { seed, ..SearchConfig::default() };
        let router = Router::new(&g, &d, &timing, &cfg);
        let phi = router.initial_layout(&dag).unwrap();
        let out = router.route(&dag, &phi).unwrap();
        let last = replay(&out.instructions, &phi, &g, &dag).unwrap();
        prop_assert_eq!(&last, &out.final_assignment);
        let ts = schedule(&out.instructions, &phi, &g, &dag, &timing).unwrap();
        let violations = validate(&ts, &phi, &g, &dag, &timing);
        prop_assert!(violations.is_empty(), "{:?}", violations);
    }
}

#[test]
fn every_arrangement_on_mini_is_reachable() {
    let g = PositionGraph::build(&preset("MINI", 2).unwrap()).unwrap();
    let slots: Vec<NodeId> = g.traps().iter().flat_map(|t| t.slots()).collect();
    let start = IonAssignment::new(&g, [slots[0], slots[1], slots[2]]).unwrap();
    let mut seen = HashSet::from([start.placements().to_vec()]);
    let mut queue = VecDeque::from([start]);
    while let Some(phi) = queue.pop_front() {
        for m in legal_moves(&phi, &g) {
            let next = apply_move(&phi, &g, &m).unwrap();
            if seen.insert(next.placements().to_vec()) {
                queue.push_back(next);
            }
        }
    }
    // Three labelled ions on four trap slots.
    for a in &slots {
        for b in &slots {
            for c in &slots {
                if a != b && b != c && a != c {
                    assert!(seen.contains(&vec![*a, *b, *c]), "{a} {b} {c} unreachable");
                }
            }
        }
    }
}
