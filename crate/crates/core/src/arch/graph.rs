//! The position graph: one node per place an ion can sit, one labeled edge per legal
//! single-step transition between two such places.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};

use super::spec::{ArchitectureSpec, Endpoint, JunctionId, SegmentId, TrapId, TrapKind};
use super::ArchError;
use crate::num::Scalar;

/// Dense index of a position-graph node.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(value: usize) -> Self {
        NodeId(value as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeLabel {
    /// Between neighbouring slots of one trap.
    Swap,
    /// Between a trap end slot and a segment.
    MergeSplit,
    /// Between two segments sharing a junction.
    Move,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum NodeKind {
    /// `trap` is the dense trap index, `slot` counts from 0 to capacity - 1.
    TrapSlot { trap: usize, slot: usize },
    /// `segment` is the dense segment index.
    Segment { segment: usize },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub label: EdgeLabel,
    /// Dense junction index for move edges.
    pub junction: Option<usize>,
}

impl Edge {
    pub fn other(&self, n: NodeId) -> NodeId {
        if self.u == n {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrapInfo {
    pub id: TrapId,
    pub kind: TrapKind,
    pub capacity: usize,
    pub first_node: NodeId,
    /// Segment node attached to each end, if any.
    pub ends: [Option<NodeId>; 2],
}

impl TrapInfo {
    pub fn slots(&self) -> impl Iterator<Item = NodeId> + Clone {
        let first = self.first_node.0;
        (first..first + self.capacity as u32).map(NodeId)
    }

    pub fn slot(&self, index: usize) -> NodeId {
        NodeId(self.first_node.0 + index as u32)
    }

    /// Slot node for end 0 or end 1.
    pub fn end_slot(&self, end: usize) -> NodeId {
        if end == 0 {
            self.first_node
        } else {
            self.slot(self.capacity - 1)
        }
    }

    pub fn is_executable(&self) -> bool {
        self.kind == TrapKind::Executable
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JunctionInfo {
    pub id: JunctionId,
    pub segments: Vec<NodeId>,
}

/// Labeled undirected graph of ion positions for one device.
#[derive(Clone, Debug)]
pub struct PositionGraph {
    nodes: Vec<NodeKind>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(NodeId, usize)>>,
    lookup: HashMap<(NodeId, NodeId), usize>,
    traps: Vec<TrapInfo>,
    segment_ids: Vec<SegmentId>,
    junctions: Vec<JunctionInfo>,
}

impl PositionGraph {
    /// Builds the graph with traps in id order followed by segments in id order.
    pub fn build(spec: &ArchitectureSpec) -> Result<Self, ArchError> {
        let endpoints = spec.validate()?;

        let mut trap_specs: Vec<_> = spec.traps.iter().collect();
        trap_specs.sort_by_key(|t| t.id);
        let mut nodes = Vec::new();
        let mut traps = Vec::with_capacity(trap_specs.len());
        for (ti, trap) in trap_specs.iter().enumerate() {
            let first_node = NodeId::from(nodes.len());
            nodes.extend((0..trap.capacity).map(|slot| NodeKind::TrapSlot { trap: ti, slot }));
            traps.push(TrapInfo {
                id: trap.id,
                kind: trap.kind,
                capacity: trap.capacity,
                first_node,
                ends: [None, None],
            });
        }
        let trap_index: HashMap<TrapId, usize> =
            traps.iter().enumerate().map(|(i, t)| (t.id, i)).collect();

        // `endpoints` is a BTreeMap so segments come out in id order.
        let segment_ids: Vec<SegmentId> = endpoints.keys().copied().collect();
        let mut segment_node = HashMap::new();
        for (si, seg) in segment_ids.iter().enumerate() {
            segment_node.insert(*seg, NodeId::from(nodes.len()));
            nodes.push(NodeKind::Segment { segment: si });
        }

        let mut graph = PositionGraph {
            adjacency: vec![Vec::new(); nodes.len()],
            nodes,
            edges: Vec::new(),
            lookup: HashMap::new(),
            traps,
            segment_ids,
            junctions: Vec::new(),
        };

        for ti in 0..graph.traps.len() {
            let trap = graph.traps[ti].clone();
            for s in 1..trap.capacity {
                graph.add_edge(trap.slot(s - 1), trap.slot(s), EdgeLabel::Swap, None);
            }
        }

        for (seg, ends) in &endpoints {
            let seg_node = segment_node[seg];
            for ep in ends {
                if let Endpoint::TrapEnd(t, end) = ep {
                    let ti = trap_index[t];
                    graph.traps[ti].ends[*end] = Some(seg_node);
                    let slot = graph.traps[ti].end_slot(*end);
                    graph.add_edge(slot, seg_node, EdgeLabel::MergeSplit, None);
                }
            }
        }

        let mut junction_specs: Vec<_> = spec.junctions.iter().collect();
        junction_specs.sort_by_key(|j| j.id);
        for (ji, junction) in junction_specs.iter().enumerate() {
            let members: Vec<NodeId> = junction.segments.iter().map(|s| segment_node[s]).collect();
            for a in 0..members.len() {
                for b in a + 1..members.len() {
                    // Two junctions sharing two segments would repeat this pair; keep the first.
                    if !graph.lookup.contains_key(&key(members[a], members[b])) {
                        graph.add_edge(members[a], members[b], EdgeLabel::Move, Some(ji));
                    }
                }
            }
            graph.junctions.push(JunctionInfo {
                id: junction.id,
                segments: members,
            });
        }

        for list in &mut graph.adjacency {
            list.sort();
        }
        Ok(graph)
    }

    fn add_edge(&mut self, u: NodeId, v: NodeId, label: EdgeLabel, junction: Option<usize>) {
        let idx = self.edges.len();
        self.edges.push(Edge {
            u,
            v,
            label,
            junction,
        });
        self.adjacency[u.index()].push((v, idx));
        self.adjacency[v.index()].push((u, idx));
        self.lookup.insert(key(u, v), idx);
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub fn kind(&self, n: NodeId) -> NodeKind {
        self.nodes[n.index()]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, idx: usize) -> &Edge {
        &self.edges[idx]
    }

    pub fn edge_between(&self, u: NodeId, v: NodeId) -> Option<&Edge> {
        self.lookup.get(&key(u, v)).map(|&i| &self.edges[i])
    }

    /// Neighbours with the connecting edge index, sorted by node id.
    pub fn neighbors(&self, n: NodeId) -> &[(NodeId, usize)] {
        &self.adjacency[n.index()]
    }

    pub fn traps(&self) -> &[TrapInfo] {
        &self.traps
    }

    pub fn trap(&self, index: usize) -> &TrapInfo {
        &self.traps[index]
    }

    pub fn trap_index(&self, id: TrapId) -> Option<usize> {
        self.traps.iter().position(|t| t.id == id)
    }

    pub fn junctions(&self) -> &[JunctionInfo] {
        &self.junctions
    }

    pub fn segment_id(&self, segment: usize) -> SegmentId {
        self.segment_ids[segment]
    }

    pub fn num_segments(&self) -> usize {
        self.segment_ids.len()
    }

    pub fn segment_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        let first = self.nodes.len() - self.segment_ids.len();
        (first..self.nodes.len()).map(NodeId::from)
    }

    /// Dense trap index owning `n`, if `n` is a trap slot.
    pub fn trap_of(&self, n: NodeId) -> Option<usize> {
        match self.kind(n) {
            NodeKind::TrapSlot { trap, .. } => Some(trap),
            NodeKind::Segment { .. } => None,
        }
    }

    pub fn is_segment(&self, n: NodeId) -> bool {
        matches!(self.kind(n), NodeKind::Segment { .. })
    }

    /// True when `n` is slot 0 or the last slot of its trap.
    pub fn is_trap_end(&self, n: NodeId) -> bool {
        match self.kind(n) {
            NodeKind::TrapSlot { trap, slot } => slot == 0 || slot + 1 == self.traps[trap].capacity,
            NodeKind::Segment { .. } => false,
        }
    }

    pub fn max_executable_capacity(&self) -> usize {
        self.traps
            .iter()
            .filter(|t| t.is_executable())
            .map(|t| t.capacity)
            .max()
            .unwrap_or(0)
    }

    pub fn total_trap_capacity(&self) -> usize {
        self.traps.iter().map(|t| t.capacity).sum()
    }

    /// Human-readable node name such as `T1[0]` or `S4`.
    pub fn node_name(&self, n: NodeId) -> String {
        match self.kind(n) {
            NodeKind::TrapSlot { trap, slot } => format!("{}[{}]", self.traps[trap].id, slot),
            NodeKind::Segment { segment } => self.segment_ids[segment].to_string(),
        }
    }

    /// Lowest-cost path from `source` to any node accepted by `is_goal`, following only edges
    /// for which `cost` returns a weight. Ties resolve toward lower node ids.
    pub fn shortest_path<T, G, C>(
        &self,
        source: NodeId,
        is_goal: G,
        cost: C,
    ) -> Option<(T, Vec<NodeId>)>
    where
        T: Scalar,
        G: Fn(NodeId) -> bool,
        C: Fn(NodeId, NodeId, &Edge) -> Option<T>,
    {
        let n = self.num_nodes();
        let mut dist = vec![T::infinity(); n];
        let mut prev: Vec<Option<NodeId>> = vec![None; n];
        let mut heap = BinaryHeap::new();
        dist[source.index()] = T::zero();
        heap.push(Reverse((OrderedFloat(0.0f64), source)));
        let mut settled = vec![false; n];
        while let Some(Reverse((_, u))) = heap.pop() {
            if std::mem::replace(&mut settled[u.index()], true) {
                continue;
            }
            let d = dist[u.index()];
            if is_goal(u) {
                let mut path = vec![u];
                let mut cur = u;
                while let Some(p) = prev[cur.index()] {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return Some((d, path));
            }
            for &(v, e) in self.neighbors(u) {
                let Some(w) = cost(u, v, &self.edges[e]) else {
                    continue;
                };
                let nd = d + w;
                if nd < dist[v.index()] {
                    dist[v.index()] = nd;
                    prev[v.index()] = Some(u);
                    heap.push(Reverse((OrderedFloat(nd.as_f64()), v)));
                }
            }
        }
        None
    }

    /// Structured text dump: one line per node and per edge.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for n in self.nodes() {
            out.push_str(&format!("node {} {}\n", n.0, self.node_name(n)));
        }
        for e in &self.edges {
            let label = match e.label {
                EdgeLabel::Swap => "swap",
                EdgeLabel::MergeSplit => "merge_split",
                EdgeLabel::Move => "move",
            };
            out.push_str(&format!("edge {} {} {}\n", e.u.0, e.v.0, label));
        }
        out
    }
}

#[inline]
fn key(u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}
