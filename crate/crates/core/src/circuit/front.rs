use std::collections::VecDeque;

use thiserror::Error;

use super::{BlockDag, BlockId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontError {
    #[error("block {0} is not in the front layer")]
    NotInFront(BlockId),
}

/// Execution progress over a [`BlockDag`]: the front layer `F` of ready blocks and the
/// extended set `E` of upcoming ones. Updated functionally, so callers can branch by cloning.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrontState {
    executed: Vec<bool>,
    waiting_on: Vec<usize>,
    front: Vec<BlockId>,
    extended: Vec<BlockId>,
    lookahead: usize,
    done: usize,
}

impl FrontState {
    pub fn new(dag: &BlockDag, lookahead: usize) -> Self {
        let waiting_on: Vec<usize> = (0..dag.len())
            .map(|b| dag.predecessors(BlockId(b as u32)).len())
            .collect();
        let front = (0..dag.len())
            .filter(|&b| waiting_on[b] == 0)
            .map(|b| BlockId(b as u32))
            .collect();
        let mut fs = FrontState {
            executed: vec![false; dag.len()],
            waiting_on,
            front,
            extended: Vec::new(),
            lookahead,
            done: 0,
        };
        fs.refresh_extended(dag);
        fs
    }

    pub fn front(&self) -> &[BlockId] {
        &self.front
    }

    pub fn extended(&self) -> &[BlockId] {
        &self.extended
    }

    pub fn lookahead(&self) -> usize {
        self.lookahead
    }

    pub fn is_executed(&self, b: BlockId) -> bool {
        self.executed[b.index()]
    }

    pub fn executed_count(&self) -> usize {
        self.done
    }

    pub fn is_done(&self) -> bool {
        self.front.is_empty()
    }

    pub fn advance(&self, dag: &BlockDag, block: BlockId) -> Result<FrontState, FrontError> {
        let mut next = self.clone();
        next.advance_in_place(dag, block)?;
        Ok(next)
    }

    pub fn advance_in_place(&mut self, dag: &BlockDag, block: BlockId) -> Result<(), FrontError> {
        let pos = self
            .front
            .binary_search(&block)
            .map_err(|_| FrontError::NotInFront(block))?;
        self.front.remove(pos);
        self.executed[block.index()] = true;
        self.done += 1;
        for &s in dag.successors(block) {
            let w = &mut self.waiting_on[s.index()];
            *w -= 1;
            if *w == 0 {
                let at = self.front.binary_search(&s).unwrap_err();
                self.front.insert(at, s);
            }
        }
        self.refresh_extended(dag);
        Ok(())
    }

    fn refresh_extended(&mut self, dag: &BlockDag) {
        self.extended.clear();
        if self.lookahead == 0 {
            return;
        }
        let mut seen = vec![false; dag.len()];
        let mut queue: VecDeque<BlockId> = VecDeque::new();
        for &f in &self.front {
            seen[f.index()] = true;
            queue.push_back(f);
        }
        while let Some(b) = queue.pop_front() {
            for &s in dag.successors(b) {
                if !seen[s.index()] {
                    seen[s.index()] = true;
                    self.extended.push(s);
                    if self.extended.len() == self.lookahead {
                        return;
                    }
                    queue.push_back(s);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{partition_blocks, Circuit, GateKind};

    #[test]
    fn chain_of_three() {
        let mut c = Circuit::new(4);
        c.push(GateKind::Cx, &[], &[0, 1])
            .push(GateKind::Cx, &[], &[1, 2])
            .push(GateKind::Cx, &[], &[2, 3]);
        let dag = partition_blocks(&c, 2).unwrap();
        let fs = FrontState::new(&dag, 20);
        assert_eq!(fs.front(), &[BlockId(0)]);
        assert_eq!(fs.extended(), &[BlockId(1), BlockId(2)]);
        let fs = fs.advance(&dag, BlockId(0)).unwrap();
        assert_eq!(fs.front(), &[BlockId(1)]);
        assert_eq!(fs.extended(), &[BlockId(2)]);
        assert_eq!(
            fs.advance(&dag, BlockId(2)),
            Err(FrontError::NotInFront(BlockId(2)))
        );
    }

    #[test]
    fn lookahead_caps_extended_set() {
        let mut c = Circuit::new(3);
        for i in 0..6 {
            let (a, b) = if i % 2 == 0 { (0, 1) } else { (1, 2) };
            c.push(GateKind::Cx, &[], &[a, b]);
        }
        let dag = partition_blocks(&c, 2).unwrap();
        assert_eq!(dag.len(), 6);
        let fs = FrontState::new(&dag, 2);
        assert_eq!(fs.extended(), &[BlockId(1), BlockId(2)]);
        let fs = FrontState::new(&dag, 0);
        assert!(fs.extended().is_empty());
    }

    #[test]
    fn empty_dag_is_done() {
        let dag = partition_blocks(&Circuit::new(3), 3).unwrap();
        let fs = FrontState::new(&dag, 20);
        assert!(fs.is_done());
        assert!(fs.front().is_empty());
    }
}
