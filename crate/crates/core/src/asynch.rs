//! Infinite walks for the asynchronous building block, and an exhaustive
//! checker that two such walks meet whatever the relative speeds.
//!
//! In the checker's model every round the adversary advances a non-empty
//! subset of the agents by one walk step. Agents meet when they share a node
//! at the end of a round, cross the same edge in opposite directions in one
//! round, or cross the same edge in the same direction in one round.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::graph::{NodeId, Port, PortGraph};
use crate::uxs::{RoundTrip, UxsLibrary};

/// A deterministic infinite walk driven only by what an agent can observe.
pub trait AsynchWalk: Clone + Hash + fmt::Debug + Send + Sync + 'static {
    fn label(&self) -> u64;

    /// Port for the next step, given the degree of the current node and the
    /// port by which it was entered (`None` before the first step).
    fn next_port(&mut self, degree: usize, entry: Option<Port>) -> Port;
}

/// For `m = 1, 2, …`: the round trip of the size-`m` exploration sequence
/// from the start node, repeated `(P(m)+1)^λ` times. Sizes beyond the
/// library reuse its largest sequence. Repetition counts saturate at
/// `u64::MAX`, which no simulation horizon reaches.
#[derive(Clone)]
pub struct DefaultAsynchWalk {
    library: Arc<UxsLibrary>,
    label: u64,
    m: usize,
    reps: u64,
    rep: u64,
    trip: RoundTrip,
}

impl DefaultAsynchWalk {
    pub fn new(label: u64, library: Arc<UxsLibrary>) -> Result<Self> {
        if label == 0 {
            return Err(invalid("label must be positive"));
        }
        let mut w = Self {
            library,
            label,
            m: 1,
            reps: 0,
            rep: 0,
            trip: RoundTrip::new(),
        };
        w.reps = w.reps_for(1);
        Ok(w)
    }

    /// Current size estimate `m`.
    pub fn phase(&self) -> usize {
        self.m
    }

    /// Repetitions of the size-`m` round trip.
    pub fn reps_for(&self, m: usize) -> u64 {
        repetitions(self.library.for_size(m).len(), self.label)
    }

    /// Total steps of all phases up to and including `m`, saturating.
    pub fn steps_through_phase(&self, m: usize) -> u64 {
        (1..=m).fold(0u64, |acc, k| {
            let trip = 2 * self.library.for_size(k).len() as u64;
            acc.saturating_add(trip.saturating_mul(self.reps_for(k)))
        })
    }

    fn advance_phase(&mut self) {
        self.m += 1;
        self.rep = 0;
        self.reps = self.reps_for(self.m);
    }
}

/// `(P+1)^λ`, saturating.
pub fn repetitions(p: usize, label: u64) -> u64 {
    let base = p as u64 + 1;
    let exp = u32::try_from(label).unwrap_or(u32::MAX);
    base.checked_pow(exp).unwrap_or(u64::MAX)
}

impl AsynchWalk for DefaultAsynchWalk {
    fn label(&self) -> u64 {
        self.label
    }

    fn next_port(&mut self, degree: usize, entry: Option<Port>) -> Port {
        while self.library.for_size(self.m).is_empty() {
            self.advance_phase();
        }
        let library = Arc::clone(&self.library);
        let terms = &library.for_size(self.m).terms;
        let port = self.trip.next_port(terms, degree, entry);
        if self.trip.finished(terms) {
            self.trip.reset();
            self.rep += 1;
            if self.rep >= self.reps {
                self.advance_phase();
            }
        }
        port
    }
}

impl Hash for DefaultAsynchWalk {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.label.hash(state);
        self.m.hash(state);
        self.rep.hash(state);
        self.trip.hash(state);
    }
}

impl fmt::Debug for DefaultAsynchWalk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DefaultAsynchWalk")
            .field("label", &self.label)
            .field("m", &self.m)
            .field("rep", &self.rep)
            .field("reps", &self.reps)
            .field("step", &self.trip.position())
            .finish()
    }
}

/// Nodes visited by `walk` from `start` over `steps` steps, start included.
pub fn walk_positions<W: AsynchWalk>(
    g: &PortGraph,
    walk: &mut W,
    start: NodeId,
    steps: usize,
) -> Vec<NodeId> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut at = start;
    let mut entry = None;
    out.push(at);
    for _ in 0..steps {
        let d = g.degree(at);
        let port = walk.next_port(d, entry);
        let h = g.step(at, port);
        at = h.to;
        entry = Some(h.entry);
        out.push(at);
    }
    out
}

/// Which agents the adversary advances in one round.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Advance {
    A,
    B,
    Both,
}

impl Advance {
    fn delta(self) -> (usize, usize) {
        match self {
            Advance::A => (1, 0),
            Advance::B => (0, 1),
            Advance::Both => (1, 1),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeetingKind {
    /// Opposite directions inside one edge in the same round.
    Crossing,
    /// Same edge, same direction, same round.
    CoTraversal,
    /// At a node where one agent has not moved yet.
    NeverMoved,
    /// At a node both reached from the same neighbor, in different rounds.
    SameOrigin,
    /// At a node both reached from the same neighbor in the same round.
    SameOriginSameRound,
    /// At a node reached from different neighbors.
    DifferentOrigins,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MeetingWitness {
    pub kind: MeetingKind,
    /// Walk steps completed by each agent when the meeting happens.
    pub step_a: usize,
    pub step_b: usize,
    /// Meeting node, or the tail of the edge for meetings inside an edge.
    pub node: NodeId,
    /// Other endpoint for meetings inside an edge.
    pub edge_to: Option<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum AsynchVerdict {
    /// Every schedule meets before the agents make `horizon` steps in total.
    AlwaysMeets {
        /// Largest total step count at which the adversary can force the meeting.
        worst_total_steps: usize,
        /// The meeting reached along such a slowest schedule.
        witness: MeetingWitness,
        states: usize,
    },
    /// A schedule of rounds reaching the horizon without a meeting.
    Avoided { schedule: Vec<Advance> },
}

#[derive(Copy, Clone, Debug)]
pub struct AsynchCheck {
    /// Bound on the total number of steps of both agents.
    pub horizon: usize,
    /// Most cursor pairs the search may memoize.
    pub state_ceiling: usize,
    /// Try the adversary's options in reverse order.
    pub reverse_order: bool,
}

impl AsynchCheck {
    pub fn new(horizon: usize) -> Self {
        Self {
            horizon,
            state_ceiling: 20_000_000,
            reverse_order: false,
        }
    }
}

/// Default horizon: four times the steps both walks need to finish their
/// size-`n` phases, capped at `ceiling`.
pub fn default_horizon(
    g: &PortGraph,
    a: &DefaultAsynchWalk,
    b: &DefaultAsynchWalk,
    ceiling: usize,
) -> usize {
    let n = g.node_count();
    let steps = a
        .steps_through_phase(n)
        .saturating_add(b.steps_through_phase(n))
        .saturating_mul(4);
    usize::try_from(steps).unwrap_or(usize::MAX).min(ceiling)
}

#[derive(Copy, Clone)]
enum Memo {
    Avoid(Advance),
    Meet { worst: usize, via: Advance },
}

/// Searches every adversarial interleaving of the two walks for one that
/// avoids all meetings until the agents have made `check.horizon` steps in
/// total.
pub fn verify_asynch_meeting<A: AsynchWalk, B: AsynchWalk>(
    g: &PortGraph,
    walk_a: &A,
    walk_b: &B,
    starts: (NodeId, NodeId),
    check: AsynchCheck,
) -> Result<AsynchVerdict> {
    if starts.0 == starts.1 {
        return Err(invalid("agents must start at distinct nodes"));
    }
    for s in [starts.0, starts.1] {
        if s.index() >= g.node_count() {
            return Err(invalid(format!("start node {s} out of range")));
        }
    }
    let horizon = check.horizon;
    if horizon == 0 {
        return Ok(AsynchVerdict::Avoided {
            schedule: Vec::new(),
        });
    }
    let pa = walk_positions(g, &mut walk_a.clone(), starts.0, horizon + 1);
    let pb = walk_positions(g, &mut walk_b.clone(), starts.1, horizon + 1);
    let order: [Advance; 3] = if check.reverse_order {
        [Advance::Both, Advance::B, Advance::A]
    } else {
        [Advance::A, Advance::B, Advance::Both]
    };

    let mut memo: FxHashMap<(u32, u32), Memo> = FxHashMap::default();
    // frame: cursor pair, next option index, best meeting found so far
    let mut stack: Vec<((usize, usize), usize, Option<(usize, Advance)>)> = vec![((0, 0), 0, None)];
    while let Some(frame) = stack.last_mut() {
        let ((i, j), k, best) = *frame;
        if k == order.len() {
            let (worst, via) = best.expect("every option was resolved");
            memo.insert((i as u32, j as u32), Memo::Meet { worst, via });
            stack.pop();
            continue;
        }
        let mv = order[k];
        let (di, dj) = mv.delta();
        let (ni, nj) = (i + di, j + dj);
        let outcome = if meeting(&pa, &pb, (i, j), mv).is_some() {
            Some(Memo::Meet {
                worst: ni + nj,
                via: mv,
            })
        } else if ni + nj >= horizon {
            Some(Memo::Avoid(mv))
        } else {
            memo.get(&(ni as u32, nj as u32)).copied()
        };
        match outcome {
            None => {
                if memo.len() >= check.state_ceiling {
                    return Err(Error::ResourceLimit(format!(
                        "asynchronous meeting search exceeded {} states",
                        check.state_ceiling
                    )));
                }
                stack.push(((ni, nj), 0, None));
            }
            Some(Memo::Avoid(_)) => {
                memo.insert((i as u32, j as u32), Memo::Avoid(mv));
                stack.pop();
            }
            Some(Memo::Meet { worst, .. }) => {
                let frame = stack.last_mut().unwrap();
                frame.1 += 1;
                if frame.2.is_none_or(|(w, _)| worst > w) {
                    frame.2 = Some((worst, mv));
                }
            }
        }
    }

    let (mut i, mut j) = (0usize, 0usize);
    match memo[&(0, 0)] {
        Memo::Avoid(_) => {
            let mut schedule = Vec::new();
            while i + j < horizon {
                let Memo::Avoid(mv) = memo[&(i as u32, j as u32)] else {
                    unreachable!("avoiding states chain to the horizon")
                };
                schedule.push(mv);
                let (di, dj) = mv.delta();
                i += di;
                j += dj;
            }
            Ok(AsynchVerdict::Avoided { schedule })
        }
        Memo::Meet { worst, .. } => loop {
            let Memo::Meet { via, .. } = memo[&(i as u32, j as u32)] else {
                unreachable!("meeting states chain to a meeting")
            };
            if let Some(witness) = meeting(&pa, &pb, (i, j), via) {
                return Ok(AsynchVerdict::AlwaysMeets {
                    worst_total_steps: worst,
                    witness,
                    states: memo.len(),
                });
            }
            let (di, dj) = via.delta();
            i += di;
            j += dj;
        },
    }
}

fn meeting(
    pa: &[NodeId],
    pb: &[NodeId],
    (i, j): (usize, usize),
    mv: Advance,
) -> Option<MeetingWitness> {
    let (di, dj) = mv.delta();
    let (ni, nj) = (i + di, j + dj);
    let witness = |kind, node, edge_to| MeetingWitness {
        kind,
        step_a: ni,
        step_b: nj,
        node,
        edge_to,
    };
    if mv == Advance::Both && pa[i] == pb[nj] && pb[j] == pa[ni] {
        return Some(witness(MeetingKind::Crossing, pa[i], Some(pa[ni])));
    }
    if mv == Advance::Both && pa[i] == pb[j] && pa[ni] == pb[nj] {
        return Some(witness(MeetingKind::CoTraversal, pa[i], Some(pa[ni])));
    }
    if pa[ni] != pb[nj] {
        return None;
    }
    let kind = if ni == 0 || nj == 0 {
        MeetingKind::NeverMoved
    } else if pa[ni - 1] == pb[nj - 1] {
        if mv == Advance::Both {
            MeetingKind::SameOriginSameRound
        } else {
            MeetingKind::SameOrigin
        }
    } else {
        MeetingKind::DifferentOrigins
    };
    Some(witness(kind, pa[ni], None))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lib() -> Arc<UxsLibrary> {
        Arc::new(UxsLibrary::shipped())
    }

    #[test]
    fn phase_two_on_an_edge() {
        let g = PortGraph::path(2).unwrap();
        for (label, reps) in [(1u64, 2usize), (2, 4)] {
            let mut w = DefaultAsynchWalk::new(label, lib()).unwrap();
            assert_eq!(w.reps_for(1), 1);
            assert_eq!(w.reps_for(2), reps as u64);
            let pos = walk_positions(&g, &mut w, NodeId(0), 2 * reps);
            assert_eq!(w.phase(), 3);
            assert!(pos.iter().step_by(2).all(|&v| v == NodeId(0)));
        }
    }

    #[test]
    fn zero_label_rejected() {
        assert!(DefaultAsynchWalk::new(0, lib()).is_err());
    }

    #[test]
    fn saturating_repetitions() {
        assert_eq!(repetitions(1, 3), 8);
        assert_eq!(repetitions(1, 256), u64::MAX);
        assert_eq!(repetitions(0, 5), 1);
    }

    #[test]
    fn horizon_zero_is_avoided_trivially() {
        let g = PortGraph::path(2).unwrap();
        let a = DefaultAsynchWalk::new(1, lib()).unwrap();
        let b = DefaultAsynchWalk::new(2, lib()).unwrap();
        let v = verify_asynch_meeting(&g, &a, &b, (NodeId(0), NodeId(1)), AsynchCheck::new(0));
        assert_eq!(v.unwrap(), AsynchVerdict::Avoided { schedule: vec![] });
    }

    #[test]
    fn two_node_tree_always_meets() {
        let g = PortGraph::path(2).unwrap();
        let a = DefaultAsynchWalk::new(1, lib()).unwrap();
        let b = DefaultAsynchWalk::new(2, lib()).unwrap();
        let v = verify_asynch_meeting(&g, &a, &b, (NodeId(0), NodeId(1)), AsynchCheck::new(32));
        assert!(matches!(v.unwrap(), AsynchVerdict::AlwaysMeets { .. }));
    }
}
