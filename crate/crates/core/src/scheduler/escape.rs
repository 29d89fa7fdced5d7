//! Local-minimum escape: gather a stuck block into one trap along shortest paths, clearing
//! blockers recursively and pushing stranded ions back into traps when segments congest.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use log::debug;
use ordered_float::OrderedFloat;

use super::Router;
use crate::arch::{NodeId, PositionGraph};
use crate::circuit::Block;
use crate::num::Scalar;
use crate::state::{executable_trap, legal_moves, IonAssignment, Move, Qubit};

type Stuck = String;

/// Mutable scratch state for one escape: the assignment plus the moves emitted so far.
pub(super) struct Work<'r, 'a, T: Scalar> {
    r: &'r Router<'a, T>,
    pub phi: IonAssignment,
    pub moves: Vec<Move>,
}

impl<'r, 'a, T: Scalar> Work<'r, 'a, T> {
    pub fn new(r: &'r Router<'a, T>, phi: IonAssignment) -> Self {
        Work {
            r,
            phi,
            moves: Vec::new(),
        }
    }

    fn g(&self) -> &'a PositionGraph {
        self.r.graph
    }

    fn mark(&self) -> (IonAssignment, usize) {
        (self.phi.clone(), self.moves.len())
    }

    fn rollback(&mut self, mark: (IonAssignment, usize)) {
        self.phi = mark.0;
        self.moves.truncate(mark.1);
    }

    fn occupied(&self, n: NodeId) -> bool {
        self.phi.is_occupied(n)
    }

    fn step(&mut self, from: NodeId, to: NodeId) -> Result<(), Stuck> {
        let m = Move::step(&self.phi, self.g(), from, to)
            .ok_or_else(|| format!("no ion or edge for {from}->{to}"))?;
        self.phi.apply(self.g(), &m).map_err(|e| e.to_string())?;
        self.moves.push(m);
        Ok(())
    }

    fn free_in(&self, trap: usize) -> usize {
        self.g()
            .trap(trap)
            .slots()
            .filter(|s| !self.occupied(*s))
            .count()
    }

    fn same_trap(&self, a: NodeId, b: NodeId) -> bool {
        let g = self.g();
        matches!((g.trap_of(a), g.trap_of(b)), (Some(x), Some(y)) if x == y)
    }

    fn slot_index(&self, n: NodeId) -> usize {
        let t = self.g().trap(self.g().trap_of(n).expect("trap slot"));
        n.index() - t.first_node.index()
    }

    fn segment_load(&self) -> T {
        let g = self.g();
        let segs = g.num_segments();
        if segs == 0 {
            return T::zero();
        }
        let used = g.segment_nodes().filter(|s| self.occupied(*s)).count();
        T::from_usize_lossy(used) / T::from_usize_lossy(segs)
    }

    /// Cheapest route from `from` into any slot of `trap`; occupied nodes cost one extra
    /// inner-swap duration each.
    fn plan(&self, from: NodeId, trap: usize) -> Option<(T, Vec<NodeId>)> {
        let g = self.g();
        let penalty = self.r.timing.inner_swap;
        g.shortest_path(
            from,
            |n| g.trap_of(n) == Some(trap),
            |_, v, e| Some(self.r.weight(e) + if self.occupied(v) { penalty } else { T::zero() }),
        )
    }

    /// Empties the end slot `end` of `trap` by shifting ions toward the nearest free slot.
    fn open_end_slot(&mut self, trap: usize, end: NodeId) -> Result<(), Stuck> {
        if !self.occupied(end) {
            return Ok(());
        }
        let info = self.g().trap(trap).clone();
        let cap = info.capacity as isize;
        let e = self.slot_index(end) as isize;
        let dir = if e == 0 { 1 } else { -1 };
        let mut f = e;
        loop {
            f += dir;
            if f < 0 || f >= cap {
                return Err(format!("trap {} has no free slot", info.id));
            }
            if !self.occupied(info.slot(f as usize)) {
                break;
            }
        }
        let mut i = f;
        while i != e {
            let src = i - dir;
            self.step(info.slot(src as usize), info.slot(i as usize))?;
            i = src;
        }
        Ok(())
    }

    /// Walks qubit `q` inside its trap until it sits on `target`.
    fn bubble(&mut self, q: Qubit, target: NodeId) -> Result<(), Stuck> {
        let t = self
            .g()
            .trap(self.g().trap_of(target).expect("trap slot"))
            .clone();
        let goal = self.slot_index(target);
        loop {
            let cur = self.phi.node_of(q);
            let at = self.slot_index(cur);
            if at == goal {
                return Ok(());
            }
            let next = if at < goal { at + 1 } else { at - 1 };
            self.step(cur, t.slot(next))?;
        }
    }

    /// Moves the ion at `p` along empty nodes to the nearest empty node outside `avoid`,
    /// preferring a free trap slot over a segment.
    fn park(&mut self, p: NodeId, avoid: &[bool]) -> Result<(), Stuck> {
        let g = self.g();
        let through_empty = |_: NodeId, v: NodeId, e: &crate::arch::Edge| {
            (!self.occupied(v) && !(avoid[v.index()] && g.trap_of(v).is_some()))
                .then(|| self.r.weight(e))
        };
        let into_trap = g.shortest_path(
            p,
            |n| n != p && !avoid[n.index()] && g.trap_of(n).is_some(),
            through_empty,
        );
        let route = into_trap
            .or_else(|| g.shortest_path(p, |n| n != p && !avoid[n.index()], through_empty));
        let (_, path) = route.ok_or_else(|| format!("nowhere to park the ion at {p}"))?;
        for w in path.windows(2) {
            self.step(w[0], w[1])?;
        }
        Ok(())
    }

    /// Pulls one non-block ion out of the full `trap`, leaving the segment it exits through
    /// clear if that segment lies on `path`.
    fn evict(&mut self, trap: usize, path: &[NodeId], block: &Block) -> Result<(), Stuck> {
        let g = self.g();
        let info = g.trap(trap).clone();
        let mut avoid = vec![false; g.num_nodes()];
        for n in path {
            avoid[n.index()] = true;
        }
        for s in info.slots() {
            avoid[s.index()] = true;
        }
        let mut exits: Vec<(bool, usize, NodeId, NodeId)> = (0..2)
            .filter_map(|end| {
                info.ends[end].map(|seg| (avoid[seg.index()], end, info.end_slot(end), seg))
            })
            .collect();
        exits.sort();
        exits.dedup_by_key(|x| x.3);
        let &(_, _, end_slot, seg) = exits
            .first()
            .ok_or_else(|| format!("trap {} has no exit", info.id))?;
        let e_idx = self.slot_index(end_slot);
        let victim = info
            .slots()
            .filter_map(|s| self.phi.qubit_at(s))
            .filter(|q| !block.qubits.contains(q))
            .min_by_key(|q| (self.slot_index(self.phi.node_of(*q)).abs_diff(e_idx), q.0))
            .ok_or_else(|| format!("trap {} holds only block qubits", info.id))?;
        self.bubble(victim, end_slot)?;
        if self.occupied(seg) {
            self.park(seg, &avoid)?;
        }
        self.step(end_slot, seg)?;
        if avoid[seg.index()] {
            self.park(seg, &avoid)?;
        }
        Ok(())
    }

    /// Moves the ion at `p1` into the occupied `p2` by first clearing `p2` to an empty
    /// neighbour outside `avoid`, recursing through occupied neighbours up to `depth`.
    fn resolve_congestion(
        &mut self,
        p1: NodeId,
        p2: NodeId,
        avoid: &[bool],
        depth: usize,
        visited: &mut [bool],
    ) -> Result<(), Stuck> {
        let g = self.g();
        visited[p2.index()] = true;
        if let Some(tp) = g.trap_of(p2) {
            if !avoid[p2.index()] && self.free_in(tp) > 0 {
                self.open_end_slot(tp, p2)?;
                return self.step(p1, p2);
            }
        }
        for &(n, _) in g.neighbors(p2) {
            if n == p1 || avoid[n.index()] || self.occupied(n) {
                continue;
            }
            let mark = self.mark();
            if self.step(p2, n).is_ok() {
                return self.step(p1, p2);
            }
            self.rollback(mark);
        }
        if depth == 0 {
            return Err(format!(
                "congestion at {p2} not resolved within the recursion limit"
            ));
        }
        for &(n, _) in g.neighbors(p2) {
            if n == p1
                || avoid[n.index()]
                || !self.occupied(n)
                || visited[n.index()]
                || self.same_trap(p2, n)
            {
                continue;
            }
            let mark = self.mark();
            if self
                .resolve_congestion(p2, n, avoid, depth - 1, visited)
                .is_ok()
            {
                return self.step(p1, p2);
            }
            self.rollback(mark);
        }
        Err(format!("congestion at {p2} cannot be cleared"))
    }

    /// Brings `q` into `trap`, one planned step at a time.
    fn walk(&mut self, q: Qubit, trap: usize, block: &Block) -> Result<(), Stuck> {
        let g = self.g();
        let budget = 4 * g.num_nodes() + 16;
        for _ in 0..budget {
            let u = self.phi.node_of(q);
            if g.trap_of(u) == Some(trap) {
                return Ok(());
            }
            let (_, path) = self
                .plan(u, trap)
                .ok_or_else(|| format!("no route from {u} to trap {trap}"))?;
            let v = path[1];
            if !self.occupied(v) || self.same_trap(u, v) {
                self.step(u, v)?;
            } else if g.trap_of(v) == Some(trap) {
                if self.free_in(trap) == 0 {
                    self.evict(trap, &path, block)?;
                }
                self.open_end_slot(trap, v)?;
                self.step(u, v)?;
            } else {
                let mut avoid = vec![false; g.num_nodes()];
                for n in &path {
                    avoid[n.index()] = true;
                }
                for s in g.trap(trap).slots() {
                    avoid[s.index()] = true;
                }
                avoid[v.index()] = false;
                let mut visited = vec![false; g.num_nodes()];
                visited[u.index()] = true;
                self.resolve_congestion(u, v, &avoid, self.r.recursion_depth(), &mut visited)?;
            }
        }
        Err(format!("{q} did not reach trap {trap}"))
    }

    /// Moves every block qubit into `trap`, cheapest first.
    fn gather(&mut self, block: &Block, trap: usize) -> Result<Vec<Qubit>, Stuck> {
        let g = self.g();
        let before: Vec<Qubit> = (0..self.phi.num_qubits() as u32)
            .map(Qubit)
            .filter(|q| !g.is_segment(self.phi.node_of(*q)))
            .collect();
        for _ in 0..block.width() {
            let next = block
                .qubits
                .iter()
                .filter(|q| g.trap_of(self.phi.node_of(**q)) != Some(trap))
                .filter_map(|q| {
                    self.plan(self.phi.node_of(*q), trap)
                        .map(|(c, p)| (OrderedFloat(c.as_f64()), *q, p))
                })
                .min_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
            let Some((_, q, path)) = next else { break };
            if self.free_in(trap) == 0 {
                self.evict(trap, &path, block)?;
            }
            self.walk(q, trap, block)?;
        }
        if executable_trap(&self.phi, &block.qubits, g) != Some(trap) {
            return Err(format!("block not gathered in trap {trap}"));
        }
        // Ions that were in traps before and now sit on segments were displaced by us.
        Ok(before
            .into_iter()
            .filter(|q| g.is_segment(self.phi.node_of(*q)))
            .collect())
    }

    /// Returns displaced ions to free trap slots outside `keep`.
    fn tidy(&mut self, displaced: &[Qubit], keep: usize) {
        for &q in displaced {
            let p = self.phi.node_of(q);
            if !self.g().is_segment(p) {
                continue;
            }
            let mut avoid = vec![false; self.g().num_nodes()];
            for s in self.g().trap(keep).slots() {
                avoid[s.index()] = true;
            }
            let g = self.g();
            let route = g.shortest_path(
                p,
                |n| n != p && g.trap_of(n).is_some(),
                |_, v, e| (!self.occupied(v) && !avoid[v.index()]).then(|| self.r.weight(e)),
            );
            if let Some((_, path)) = route {
                let mark = self.mark();
                if path
                    .windows(2)
                    .try_for_each(|w| self.step(w[0], w[1]))
                    .is_err()
                {
                    self.rollback(mark);
                }
            }
        }
    }

    /// Sends segment ions into the nearest traps with free space until no segment holds an
    /// ion, cheapest ion first.
    pub(super) fn push_back(&mut self) -> Result<(), Stuck> {
        let g = self.g();
        loop {
            let mut best: Option<(OrderedFloat<f64>, NodeId, Vec<NodeId>)> = None;
            for p in g.segment_nodes().filter(|s| self.occupied(*s)) {
                let route = g.shortest_path(
                    p,
                    |n| g.trap_of(n).is_some_and(|t| self.free_in(t) > 0),
                    |_, v, e| {
                        let enterable =
                            !self.occupied(v) || g.trap_of(v).is_some_and(|t| self.free_in(t) > 0);
                        enterable.then(|| self.r.weight(e))
                    },
                );
                if let Some((c, path)) = route {
                    let key = (OrderedFloat(c.as_f64()), p);
                    if best.as_ref().is_none_or(|(bc, bp, _)| key < (*bc, *bp)) {
                        best = Some((key.0, p, path));
                    }
                }
            }
            let Some((_, p, path)) = best else {
                return if g.segment_nodes().any(|s| self.occupied(s)) {
                    Err("segment ions cannot reach free trap space".into())
                } else {
                    Ok(())
                };
            };
            debug!("push back ion at {p}");
            let last = path.len() - 1;
            for (i, w) in path.windows(2).enumerate() {
                if i + 1 == last && self.occupied(w[1]) {
                    let t = g.trap_of(w[1]).expect("goal is a trap slot");
                    self.open_end_slot(t, w[1])?;
                }
                self.step(w[0], w[1])?;
            }
        }
    }

    /// Executable traps that can hold the block, cheapest gather first.
    fn rank_traps(&self, block: &Block) -> Vec<usize> {
        let g = self.g();
        let r = self.r;
        let evict_cost = r.timing.inner_swap + r.timing.split + r.timing.move_;
        let mut ranked: Vec<(OrderedFloat<f64>, usize)> = g
            .traps()
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_executable() && t.capacity >= block.width())
            .filter_map(|(i, t)| {
                let mut cost = T::zero();
                let mut incoming = 0;
                for q in &block.qubits {
                    let at = self.phi.node_of(*q);
                    if g.trap_of(at) == Some(i) {
                        continue;
                    }
                    incoming += 1;
                    cost = cost + self.plan(at, i)?.0;
                }
                let occupied = t.capacity - self.free_in(i);
                let evictions = (occupied + incoming).saturating_sub(t.capacity);
                cost = cost + evict_cost * T::from_usize_lossy(evictions);
                Some((OrderedFloat(cost.as_f64()), i))
            })
            .collect();
        ranked.sort();
        ranked.into_iter().map(|(_, i)| i).collect()
    }

    fn try_targets(&mut self, block: &Block) -> Result<(), Stuck> {
        let mut last = String::from("no executable trap can hold the block");
        for trap in self.rank_traps(block) {
            let mark = self.mark();
            match self.gather(block, trap) {
                Ok(displaced) => {
                    self.tidy(&displaced, trap);
                    return Ok(());
                }
                Err(e) => {
                    debug!("gather into trap {trap} failed: {e}");
                    last = e;
                    self.rollback(mark);
                }
            }
        }
        Err(last)
    }

    /// Summed duration of the moves emitted after position `from`.
    fn moves_cost(&self, from: usize) -> T {
        self.moves[from..]
            .iter()
            .map(|m| crate::timeline::move_duration(m.kind, self.r.timing))
            .sum()
    }

    /// Makes `block` executable, emitting the moves into `self.moves`.
    pub fn escape(&mut self, block: &Block) -> Result<(), Stuck> {
        if executable_trap(&self.phi, &block.qubits, self.g()).is_some() {
            return Ok(());
        }
        let mark = self.mark();
        if self.segment_load() > self.r.config.pushback_threshold {
            // Plan both with and without clearing the segments first; keep the cheaper.
            let direct = self.try_targets(block).ok().map(|_| {
                (
                    self.moves_cost(mark.1),
                    self.phi.clone(),
                    self.moves.clone(),
                )
            });
            self.rollback(mark.clone());
            let cleared = self.push_back().and_then(|_| self.try_targets(block));
            match (cleared, direct) {
                (Ok(()), Some((cost, phi, moves))) if cost < self.moves_cost(mark.1) => {
                    self.phi = phi;
                    self.moves = moves;
                }
                (Ok(()), _) => {}
                (Err(_), Some((_, phi, moves))) => {
                    self.phi = phi;
                    self.moves = moves;
                }
                (Err(_), None) => self.rollback(mark.clone()),
            }
            if executable_trap(&self.phi, &block.qubits, self.g()).is_some() {
                return Ok(());
            }
        } else if self.try_targets(block).is_ok() {
            return Ok(());
        }
        if self.push_back().is_ok() && self.try_targets(block).is_ok() {
            return Ok(());
        }
        self.rollback(mark);
        debug!("path-based escape failed; falling back to state search");
        self.search(block)
    }

    /// Distance-to-goal estimate for the fallback search: per candidate trap, the block
    /// qubits' distances to it plus one split for every ion that must leave it.
    fn gather_bound(&self, phi: &IonAssignment, block: &Block) -> T {
        let g = self.g();
        let t = self.r.timing;
        let exit = if t.split > t.merge { t.split } else { t.merge };
        g.traps()
            .iter()
            .filter(|tr| tr.is_executable() && tr.capacity >= block.width())
            .map(|tr| {
                let travel: T = block
                    .qubits
                    .iter()
                    .map(|q| {
                        let row = self.r.dist.row(phi.node_of(*q));
                        tr.slots()
                            .map(|s| row[s.index()])
                            .fold(T::infinity(), crate::num::min)
                    })
                    .sum();
                let others = tr
                    .slots()
                    .filter_map(|s| phi.qubit_at(s))
                    .filter(|q| !block.qubits.contains(q))
                    .count();
                let excess = others.saturating_sub(tr.capacity - block.width());
                travel + exit * T::from_usize_lossy(excess)
            })
            .fold(T::infinity(), crate::num::min)
    }

    /// Weighted best-first search over assignments until the block is co-located.
    fn search(&mut self, block: &Block) -> Result<(), Stuck> {
        let g = self.g();
        let start = self.phi.clone();
        let mut states: Vec<(IonAssignment, usize, Option<Move>, T)> =
            vec![(start.clone(), usize::MAX, None, T::zero())];
        let mut seen: HashSet<Vec<NodeId>> = HashSet::new();
        seen.insert(start.placements().to_vec());
        let mut open = BinaryHeap::new();
        let two = T::lit(2.0);
        open.push(Reverse((
            OrderedFloat((two * self.gather_bound(&start, block)).as_f64()),
            0usize,
        )));
        let mut expansions = 0;
        while let Some(Reverse((_, idx))) = open.pop() {
            if executable_trap(&states[idx].0, &block.qubits, g).is_some() {
                let mut seq = Vec::new();
                let mut cur = idx;
                while let Some(m) = states[cur].2 {
                    seq.push(m);
                    cur = states[cur].1;
                }
                seq.reverse();
                for m in seq {
                    self.phi.apply(g, &m).map_err(|e| e.to_string())?;
                    self.moves.push(m);
                }
                return Ok(());
            }
            expansions += 1;
            if expansions > self.r.config.search_budget {
                break;
            }
            let (phi, cost) = (states[idx].0.clone(), states[idx].3);
            for m in legal_moves(&phi, g) {
                let mut next = phi.clone();
                next.apply(g, &m).expect("legal move applies");
                if !seen.insert(next.placements().to_vec()) {
                    continue;
                }
                let w = g
                    .edge_between(m.from, m.to)
                    .map(|e| self.r.weight(e))
                    .unwrap_or(T::one());
                let c = cost + w;
                let f = c + two * self.gather_bound(&next, block);
                states.push((next, idx, Some(m), c));
                open.push(Reverse((OrderedFloat(f.as_f64()), states.len() - 1)));
            }
        }
        Err(format!(
            "no co-locating sequence found within {} expansions",
            self.r.config.search_budget
        ))
    }
}
