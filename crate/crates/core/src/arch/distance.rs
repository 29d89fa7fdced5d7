//! Dense all-pairs shuttle cost matrix.

use super::graph::{NodeId, PositionGraph};
use super::timing::TimingModel;
use crate::num::Scalar;

/// Minimal shuttle duration between every pair of positions; `+inf` when unreachable.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix<T = f64> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> DistanceMatrix<T> {
    /// Floyd-Warshall over an undirected weighted edge list.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, T)>) -> Self {
        let mut data = vec![T::infinity(); n * n];
        for i in 0..n {
            data[i * n + i] = T::zero();
        }
        for (u, v, w) in edges {
            if w < data[u * n + v] {
                data[u * n + v] = w;
                data[v * n + u] = w;
            }
        }
        for k in 0..n {
            for i in 0..n {
                let dik = data[i * n + k];
                if dik.is_infinite() {
                    continue;
                }
                for j in 0..n {
                    let cand = dik + data[k * n + j];
                    if cand < data[i * n + j] {
                        data[i * n + j] = cand;
                    }
                }
            }
        }
        DistanceMatrix { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, u: NodeId, v: NodeId) -> T {
        self.data[u.index() * self.n + v.index()]
    }

    pub fn row(&self, u: NodeId) -> &[T] {
        &self.data[u.index() * self.n..(u.index() + 1) * self.n]
    }
}

/// Shuttle-cost matrix of `graph` with label-dependent weights from `timing`.
pub fn all_pairs_shuttle_cost<T: Scalar>(
    graph: &PositionGraph,
    timing: &TimingModel<T>,
) -> DistanceMatrix<T> {
    DistanceMatrix::from_edges(
        graph.num_nodes(),
        graph
            .edges()
            .iter()
            .map(|e| (e.u.index(), e.v.index(), timing.edge_weight(e.label))),
    )
}
