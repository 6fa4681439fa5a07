//! Universal exploration sequences (UXS) and the round-trip trajectories
//! built from them.
//!
//! A sequence `x_0, x_1, …` drives a walk: at a node of degree `d` entered by
//! port `p`, the walk leaves by `(p + x_i) mod d`. The start node counts as
//! entered by port 0. A sequence is universal for size `m` when this walk
//! crosses every edge of every connected port-labeled graph with at most `m`
//! nodes, from every start node.

mod flat;
mod library;
mod search;
mod verify;

pub use library::{
    cache_file_name, parse_cache, read_cache, write_cache, UxsLibrary, SHIPPED_SAMPLE_TRIALS,
};
pub use search::{find_uxs, find_uxs_cached, search_uxs_ladder, SearchConfig};
pub use verify::{verify_uxs, UncoveredInstance, VerificationReport, VerifyMode};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::{NodeId, Port, PortGraph};

/// Largest size bound for which verification enumerates every labeled graph.
pub const EXHAUSTIVE_CAP: usize = 4;

/// Largest size bound accepted by sampled verification and search (edge sets
/// must fit a 64-bit coverage mask).
pub const SAMPLED_CAP: usize = 11;

/// How much confidence a sequence carries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verification {
    /// Checked on every labeled connected graph up to the size bound.
    Exhaustive,
    /// Checked on this many random connected graphs, all start nodes each.
    Sampled {
        trials: usize,
    },
    Unverified,
}

/// A sequence together with the size bound it is meant to explore.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Uxs {
    pub terms: Vec<u32>,
    pub size_bound: usize,
    pub verification: Verification,
}

impl Uxs {
    pub fn new(terms: Vec<u32>, size_bound: usize, verification: Verification) -> Self {
        Self {
            terms,
            size_bound,
            verification,
        }
    }

    /// Number of edge traversals of the forward walk, `P(m)`.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Exit port after entering a node of degree `degree` by `entry` (`None` at
/// the start node, which behaves as port 0).
pub fn apply_uxs_step(entry: Option<Port>, degree: usize, term: u32) -> Result<Port> {
    if degree == 0 {
        return Err(invalid("degree must be positive"));
    }
    let p = entry.unwrap_or(0);
    if p as usize >= degree {
        return Err(invalid(format!(
            "entry port {p} out of range for degree {degree}"
        )));
    }
    Ok(exit_port(p, degree, term))
}

#[inline]
pub(crate) fn exit_port(entry: Port, degree: usize, term: u32) -> Port {
    ((entry as u64 + term as u64) % degree as u64) as Port
}

/// Forward walk of `terms` from `v`: the exit port and entry port of every
/// traversal. Stops early only on an isolated node.
pub fn uxs_walk(g: &PortGraph, v: NodeId, terms: &[u32]) -> Vec<(Port, Port)> {
    let mut out = Vec::with_capacity(terms.len());
    let mut at = v;
    let mut entry: Port = 0;
    for &x in terms {
        let d = g.degree(at);
        if d == 0 {
            break;
        }
        let q = exit_port(entry, d, x);
        let h = g.step(at, q);
        out.push((q, h.entry));
        at = h.to;
        entry = h.entry;
    }
    out
}

/// The forward walk of `terms` from `v` followed by its exact reverse, as a
/// list of exit ports. The reverse half leaves each node by the port through
/// which the forward half entered it, so the trajectory ends at `v`.
pub fn reingold_trajectory(g: &PortGraph, v: NodeId, terms: &[u32]) -> Vec<Port> {
    let forward = uxs_walk(g, v, terms);
    let mut out: Vec<Port> = forward.iter().map(|&(q, _)| q).collect();
    out.extend(forward.iter().rev().map(|&(_, entry)| entry));
    out
}

/// Online form of [`reingold_trajectory`] for an agent that cannot see the
/// graph: feeds one exit port per step, recording entry ports on the way out
/// so the way back can replay them.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RoundTrip {
    pos: usize,
    entries: Vec<Port>,
}

impl RoundTrip {
    pub fn new() -> Self {
        Self::default()
    }

    /// Steps taken so far.
    pub fn position(&self) -> usize {
        self.pos
    }

    /// True once all `2 * terms.len()` steps have been issued.
    pub fn finished(&self, terms: &[u32]) -> bool {
        self.pos >= 2 * terms.len()
    }

    pub fn reset(&mut self) {
        self.pos = 0;
        self.entries.clear();
    }

    /// Exit port of the next step. `entry` is the port by which the current
    /// node was entered after the previous step; it is ignored on the first.
    pub fn next_port(&mut self, terms: &[u32], degree: usize, entry: Option<Port>) -> Port {
        let p = terms.len();
        assert!(self.pos < 2 * p, "round trip already finished");
        if (1..=p).contains(&self.pos) {
            self.entries
                .push(entry.expect("entry port known after a step"));
        }
        let port = if self.pos < p {
            let from = if self.pos == 0 { 0 } else { entry.unwrap_or(0) };
            exit_port(from, degree, terms[self.pos])
        } else {
            self.entries[2 * p - 1 - self.pos]
        };
        self.pos += 1;
        port
    }
}

/// Least common multiple of `1..=k`: exit ports depend only on a term modulo
/// every degree below the size bound, so terms beyond this are redundant.
pub(crate) fn lcm_up_to(k: usize) -> u64 {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    (1..=k as u64).fold(1, |acc, x| acc / gcd(acc, x) * x)
}
