//! Compact graph layout for coverage simulation over many instances.

use super::exit_port;
use crate::graph::{NodeId, PortGraph};

pub(crate) struct FlatGraph {
    offsets: Vec<u32>,
    to: Vec<u8>,
    entry: Vec<u8>,
    edge: Vec<u8>,
    pub(crate) full: u64,
}

impl FlatGraph {
    pub(crate) fn new(g: &PortGraph) -> Self {
        assert!(g.edge_count() <= 64, "coverage masks hold at most 64 edges");
        let edges = g.edges();
        let mut offsets = Vec::with_capacity(g.node_count() + 1);
        let (mut to, mut entry, mut edge) = (Vec::new(), Vec::new(), Vec::new());
        offsets.push(0);
        for u in g.nodes() {
            for (p, h) in g.ports(u).iter().enumerate() {
                let id = edges
                    .iter()
                    .position(|&(a, pa, b, pb)| {
                        (a == u && pa as usize == p) || (b == u && pb as usize == p)
                    })
                    .expect("every port belongs to an edge");
                to.push(h.to.index() as u8);
                entry.push(h.entry as u8);
                edge.push(id as u8);
            }
            offsets.push(to.len() as u32);
        }
        let full = if edges.len() == 64 {
            u64::MAX
        } else {
            (1u64 << edges.len()) - 1
        };
        Self {
            offsets,
            to,
            entry,
            edge,
            full,
        }
    }

    pub(crate) fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    fn degree(&self, u: u8) -> usize {
        (self.offsets[u as usize + 1] - self.offsets[u as usize]) as usize
    }

    /// Applies one term, returning the next state.
    #[inline]
    pub(crate) fn step(&self, s: WalkState, term: u32) -> WalkState {
        let d = self.degree(s.node);
        if d == 0 {
            return s;
        }
        let q = exit_port(s.entry as u32, d, term) as usize;
        let i = self.offsets[s.node as usize] as usize + q;
        WalkState {
            node: self.to[i],
            entry: self.entry[i],
            covered: s.covered | (1u64 << self.edge[i]),
        }
    }

    pub(crate) fn start(&self, v: NodeId) -> WalkState {
        WalkState {
            node: v.index() as u8,
            entry: 0,
            covered: 0,
        }
    }

    pub(crate) fn done(&self, s: WalkState) -> bool {
        s.covered == self.full
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub(crate) struct WalkState {
    pub(crate) node: u8,
    pub(crate) entry: u8,
    pub(crate) covered: u64,
}

/// Runs `terms` from the instance start, returning the final state.
pub(crate) fn run(g: &FlatGraph, start: NodeId, terms: &[u32]) -> WalkState {
    let mut s = g.start(start);
    for &x in terms {
        if g.done(s) {
            break;
        }
        s = g.step(s, x);
    }
    s
}
