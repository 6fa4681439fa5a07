//! Programs for unbounded adversarial faults: tours of an oriented ring of
//! known size, and repeated basic walks in trees. Both retry a blocked move
//! every round until it succeeds.

use crate::error::{invalid, Result};
use crate::graph::Port;
use crate::program::{outcome, Action, Observation, Outcome, Program};

/// Makes `2 n λ` traversals by port 0, then stays idle.
#[derive(Clone, Debug, Hash, PartialEq, Eq)]
pub struct OrientedRingProgram {
    remaining: u64,
    last: Action,
}

impl OrientedRingProgram {
    pub fn new(label: u64, ring_size: u64) -> Result<Self> {
        if label == 0 || ring_size < 3 {
            return Err(invalid(
                "label must be positive and the ring size at least 3",
            ));
        }
        let remaining = 2u64
            .checked_mul(ring_size)
            .and_then(|x| x.checked_mul(label))
            .ok_or_else(|| invalid("traversal count overflows"))?;
        Ok(Self {
            remaining,
            last: Action::Idle,
        })
    }
}

impl Program for OrientedRingProgram {
    fn decide(&mut self, obs: &Observation) -> Action {
        if let Outcome::Moved { .. } = outcome(self.last, obs) {
            self.remaining -= 1;
        }
        self.last = if self.remaining > 0 {
            Action::Move(0)
        } else {
            Action::Idle
        };
        self.last
    }

    fn halted(&self) -> bool {
        self.remaining == 0
    }
}

/// Repeats `2λ` basic walks from the start node, then stays idle.
///
/// The agent detects the end of a walk without knowing the tree: it keeps the
/// stack of ports leading back toward the start, and a walk ends when the
/// stack empties through the start's last port.
#[derive(Clone, Debug, Hash, PartialEq, Eq)]
pub struct TreeRvUf {
    walks_left: u64,
    start_degree: Option<usize>,
    back: Vec<Port>,
    next: Port,
    last: Action,
    traversals: u64,
}

impl TreeRvUf {
    pub fn new(label: u64) -> Result<Self> {
        if label == 0 {
            return Err(invalid("label must be positive"));
        }
        Ok(Self {
            walks_left: label
                .checked_mul(2)
                .ok_or_else(|| invalid("walk count overflows"))?,
            start_degree: None,
            back: Vec::new(),
            next: 0,
            last: Action::Idle,
            traversals: 0,
        })
    }

    pub fn walks_left(&self) -> u64 {
        self.walks_left
    }

    pub fn traversals(&self) -> u64 {
        self.traversals
    }
}

impl Program for TreeRvUf {
    fn decide(&mut self, obs: &Observation) -> Action {
        let start_degree = *self.start_degree.get_or_insert(obs.degree);
        if let (Action::Move(p), Outcome::Moved { entry }) = (self.last, outcome(self.last, obs)) {
            self.traversals += 1;
            if self.back.last() == Some(&p) {
                self.back.pop();
                if self.back.is_empty() && entry as usize == start_degree - 1 {
                    self.walks_left -= 1;
                }
            } else {
                self.back.push(entry);
            }
            self.next = (entry + 1) % obs.degree as Port;
        }
        self.last = if self.walks_left > 0 && start_degree > 0 {
            Action::Move(self.next)
        } else {
            Action::Idle
        };
        self.last
    }

    fn halted(&self) -> bool {
        self.walks_left == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{NodeId, PortGraph};

    /// Runs a program alone on `g` without faults until it halts.
    fn solo<P: Program>(g: &PortGraph, start: NodeId, mut p: P, limit: usize) -> Vec<Port> {
        let mut at = start;
        let mut obs = Observation::at_start(g.degree(at));
        let mut ports = Vec::new();
        for _ in 0..limit {
            match Program::decide(&mut p, &obs) {
                Action::Idle => {
                    if p.halted() {
                        break;
                    }
                }
                Action::Move(q) => {
                    let (to, entry) = g.traverse(at, q).unwrap();
                    at = to;
                    ports.push(q);
                    obs.entry_port = Some(entry);
                    obs.degree = g.degree(at);
                }
            }
        }
        ports
    }

    #[test]
    fn two_node_tree_walks() {
        let g = PortGraph::path(2).unwrap();
        let ports = solo(&g, NodeId(0), TreeRvUf::new(1).unwrap(), 100);
        assert_eq!(ports, vec![0, 0, 0, 0]);
    }

    #[test]
    fn three_node_path_label_two() {
        let g = PortGraph::path(3).unwrap();
        for v in g.nodes() {
            let ports = solo(&g, v, TreeRvUf::new(2).unwrap(), 100);
            assert_eq!(ports.len(), 16);
            let walk = g.basic_walk(v).unwrap();
            assert_eq!(ports, walk.repeat(4));
        }
    }

    #[test]
    fn oriented_ring_tours() {
        let g = PortGraph::oriented_ring(4).unwrap();
        let ports = solo(&g, NodeId(0), OrientedRingProgram::new(1, 4).unwrap(), 100);
        assert_eq!(ports, vec![0; 8]);
    }
}
