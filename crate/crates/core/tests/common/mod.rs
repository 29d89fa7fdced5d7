//! Seeded generators shared by the property and acceptance tests.
#![allow(dead_code)]

use ionroute::arch::{
    ArchitectureSpec, JunctionId, JunctionSpec, SegmentId, SegmentSpec, TrapId, TrapKind, TrapSpec,
};
use ionroute::circuit::{Circuit, GateKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug)]
pub struct ArchParams {
    pub max_junctions: usize,
    pub max_traps: usize,
    pub min_capacity: usize,
    pub max_capacity: usize,
    /// Chance that a trap after the first is storage-only.
    pub storage: f64,
    /// Chance that the last trap also connects its far end to a second junction.
    pub bridge: f64,
}

impl ArchParams {
    /// Small devices for end-to-end fuzzing.
    pub const FUZZ: ArchParams = ArchParams {
        max_junctions: 3,
        max_traps: 5,
        min_capacity: 2,
        max_capacity: 4,
        storage: 0.15,
        bridge: 0.3,
    };
    /// Wider range for structural properties.
    pub const WIDE: ArchParams = ArchParams {
        max_junctions: 5,
        max_traps: 9,
        min_capacity: 1,
        max_capacity: 6,
        storage: 0.2,
        bridge: 0.5,
    };
}

/// Random connected device: a tree of junctions joined by segments, each junction carrying
/// leaf traps so that its degree is at least two, optionally one bridge trap with both ends
/// attached. Trap 0 is always executable.
pub fn random_arch(rng: &mut impl Rng, p: &ArchParams) -> ArchitectureSpec {
    let nj = rng.random_range(1..=p.max_junctions);
    let mut junction_segments: Vec<Vec<SegmentId>> = vec![Vec::new(); nj];
    let mut next = 0u32;
    let mut seg = || {
        let s = SegmentId(next);
        next += 1;
        s
    };
    for j in 1..nj {
        let parent = rng.random_range(0..j);
        let s = seg();
        junction_segments[parent].push(s);
        junction_segments[j].push(s);
    }
    let mut owners: Vec<usize> = Vec::new();
    for (j, segs) in junction_segments.iter().enumerate() {
        for _ in segs.len()..2 {
            owners.push(j);
        }
    }
    let target = rng.random_range(owners.len().max(2)..=p.max_traps.max(owners.len()).max(2));
    while owners.len() < target {
        owners.push(rng.random_range(0..nj));
    }

    let mut traps = Vec::new();
    for (t, &j) in owners.iter().enumerate() {
        let s = seg();
        junction_segments[j].push(s);
        let kind = if t > 0 && rng.random_bool(p.storage) {
            TrapKind::Storage
        } else {
            TrapKind::Executable
        };
        let capacity = rng.random_range(p.min_capacity..=p.max_capacity);
        traps.push(TrapSpec {
            id: TrapId(t as u32),
            capacity,
            kind,
            ends: [Some(s), None],
        });
    }
    if nj > 1 && traps.len() > 2 && rng.random_bool(p.bridge) {
        let last = traps.len() - 1;
        let home = owners[last];
        let other = (home + 1 + rng.random_range(0..nj - 1)) % nj;
        let s = seg();
        junction_segments[other].push(s);
        traps[last].ends[1] = Some(s);
    }
    ArchitectureSpec {
        name: None,
        traps,
        junctions: junction_segments
            .into_iter()
            .enumerate()
            .map(|(j, segments)| JunctionSpec {
                id: JunctionId(j as u32),
                segments,
            })
            .collect(),
        segments: (0..next)
            .map(|s| SegmentSpec { id: SegmentId(s) })
            .collect(),
    }
}

/// `two_qubit` CX gates on random distinct pairs, each preceded half the time by a random
/// single-qubit gate.
pub fn random_circuit(rng: &mut impl Rng, num_qubits: usize, two_qubit: usize) -> Circuit {
    let mut c = Circuit::new(num_qubits);
    for _ in 0..two_qubit {
        if rng.random_bool(0.5) {
            let q = rng.random_range(0..num_qubits) as u32;
            if rng.random_bool(0.5) {
                c.push(GateKind::H, &[], &[q]);
            } else {
                c.push(GateKind::Rz, &[rng.random_range(0.0..std::f64::consts::TAU)], &[q]);
            }
        }
        let a = rng.random_range(0..num_qubits);
        let mut b = rng.random_range(0..num_qubits - 1);
        if b >= a {
            b += 1;
        }
        c.push(GateKind::Cx, &[], &[a as u32, b as u32]);
    }
    c
}
