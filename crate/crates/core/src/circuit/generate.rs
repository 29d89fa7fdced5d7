//! Benchmark circuit families: textbook QFT, single-layer QAOA on Erdős–Rényi graphs, and
//! quantum-volume-like random pairings.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Circuit, GateKind};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Qft,
    QaoaEr,
    QvLike,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 3] = [
        GeneratorKind::Qft,
        GeneratorKind::QaoaEr,
        GeneratorKind::QvLike,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::Qft => "qft",
            GeneratorKind::QaoaEr => "qaoa_er",
            GeneratorKind::QvLike => "qv_like",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorKind {
    type Err = GenerateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| GenerateError::UnknownKind(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    /// Edge probability of the Erdős–Rényi problem graph.
    pub edge_probability: f64,
    /// Number of random-pairing layers.
    pub depth: usize,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            edge_probability: 0.3,
            depth: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerateError {
    #[error("need at least 2 qubits, got {0}")]
    TooFewQubits(usize),
    #[error("unknown circuit kind '{0}' (expected qft, qaoa_er or qv_like)")]
    UnknownKind(String),
    #[error("edge probability {0} is outside [0, 1]")]
    Probability(f64),
}

pub fn generate(
    kind: GeneratorKind,
    n: usize,
    seed: u64,
    params: &GeneratorParams,
) -> Result<Circuit, GenerateError> {
    if n < 2 {
        return Err(GenerateError::TooFewQubits(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(match kind {
        GeneratorKind::Qft => qft(n),
        GeneratorKind::QaoaEr => {
            if !(0.0..=1.0).contains(&params.edge_probability) {
                return Err(GenerateError::Probability(params.edge_probability));
            }
            qaoa_er(n, params.edge_probability, &mut rng)
        }
        GeneratorKind::QvLike => qv_like(n, params.depth, &mut rng),
    })
}

fn controlled_phase(c: &mut Circuit, theta: f64, control: u32, target: u32) {
    c.push(GateKind::U1, &[theta / 2.0], &[control])
        .push(GateKind::Cx, &[], &[control, target])
        .push(GateKind::U1, &[-theta / 2.0], &[target])
        .push(GateKind::Cx, &[], &[control, target])
        .push(GateKind::U1, &[theta / 2.0], &[target]);
}

fn qft(n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    for i in 0..n {
        c.push(GateKind::H, &[], &[i as u32]);
        for j in i + 1..n {
            let theta = PI / f64::powi(2.0, (j - i) as i32);
            controlled_phase(&mut c, theta, j as u32, i as u32);
        }
    }
    for i in 0..n / 2 {
        let (a, b) = (i as u32, (n - 1 - i) as u32);
        c.push(GateKind::Cx, &[], &[a, b])
            .push(GateKind::Cx, &[], &[b, a])
            .push(GateKind::Cx, &[], &[a, b]);
    }
    c
}

fn qaoa_er(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Circuit {
    let gamma = rng.random_range(0.0..PI);
    let beta = rng.random_range(0.0..PI);
    let mut c = Circuit::new(n);
    for q in 0..n as u32 {
        c.push(GateKind::H, &[], &[q]);
    }
    for i in 0..n as u32 {
        for j in i + 1..n as u32 {
            if rng.random_bool(p) {
                c.push(GateKind::Rzz, &[2.0 * gamma], &[i, j]);
            }
        }
    }
    for q in 0..n as u32 {
        c.push(GateKind::Rx, &[2.0 * beta], &[q]);
    }
    c
}

fn random_u3(c: &mut Circuit, q: u32, rng: &mut ChaCha8Rng) {
    let angles = [
        rng.random_range(0.0..PI),
        rng.random_range(-PI..PI),
        rng.random_range(-PI..PI),
    ];
    c.push(GateKind::U3, &angles, &[q]);
}

fn qv_like(n: usize, depth: usize, rng: &mut ChaCha8Rng) -> Circuit {
    let mut c = Circuit::new(n);
    let mut order: Vec<u32> = (0..n as u32).collect();
    for _ in 0..depth {
        order.shuffle(rng);
        for pair in order.chunks_exact(2) {
            let (a, b) = (pair[0], pair[1]);
            for (x, y) in [(a, b), (b, a), (a, b)] {
                random_u3(&mut c, a, rng);
                random_u3(&mut c, b, rng);
                c.push(GateKind::Cx, &[], &[x, y]);
            }
            random_u3(&mut c, a, rng);
            random_u3(&mut c, b, rng);
        }
    }
    c
}
