//! Exhaustive search for the worst fault schedule under a fault bound.

use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use super::{FaultDecision, FaultSchedule};
use crate::engine::{Decided, RunConfig, World};
use crate::error::{invalid, Error, Result};
use crate::program::BoxedProgram;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Maximize the total traversals until the meeting.
    MaxCost,
    /// Delay the meeting as long as possible.
    PreventMeeting,
}

/// Outcome ranking: avoiding the meeting within the horizon beats any
/// finite value.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct WorstCaseScore {
    pub unmet: bool,
    pub value: u64,
}

#[derive(Copy, Clone, Debug)]
pub struct SearchLimits {
    /// Memoized states before falling back to beam search.
    pub state_ceiling: usize,
    pub beam_width: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        Self {
            state_ceiling: 4_000_000,
            beam_width: 256,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum SearchMethod {
    Exhaustive,
    /// Heuristic fallback; the result is a lower bound on the worst case.
    Beam {
        width: usize,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct WorstCase {
    pub objective: Objective,
    pub score: WorstCaseScore,
    pub met: bool,
    pub meeting_round: Option<u64>,
    pub cost: u64,
    /// Faults realizing the score; rounds not listed are allowed.
    #[serde(skip)]
    pub schedule: FaultSchedule,
    pub states: usize,
    pub method: SearchMethod,
}

/// Finds the schedule with at most `c` consecutive faults per agent that
/// maximizes `objective` within `cfg.horizon` rounds. The fault-free choice
/// is always explored first, so ties resolve toward fewer faults.
pub fn worst_case_search(
    cfg: &RunConfig,
    programs: [BoxedProgram; 2],
    c: u64,
    objective: Objective,
    limits: SearchLimits,
) -> Result<WorstCase> {
    if c == 0 {
        return Err(invalid("fault bound must be at least 1"));
    }
    let world = World::new(cfg, programs)?;
    let mut search = Dfs {
        c,
        horizon: cfg.horizon,
        objective,
        ceiling: limits.state_ceiling,
        memo: FxHashMap::default(),
    };
    let start = world.clone();
    let dfs = &mut search;
    // recursion depth grows with the horizon
    let outcome = std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(1 << 30)
            .spawn_scoped(s, move || {
                let root = dfs.value(start.clone())?;
                dfs.replay(start, root)
            })
            .expect("spawn search thread")
            .join()
            .expect("search thread panicked")
    });
    match outcome {
        Ok(found) => Ok(found),
        Err(Error::ResourceLimit(_)) => Ok(beam(world, c, cfg.horizon, objective, limits)),
        Err(e) => Err(e),
    }
}

type Choice = [FaultDecision; 2];

struct Dfs {
    c: u64,
    horizon: u64,
    objective: Objective,
    ceiling: usize,
    memo: FxHashMap<u128, Entry>,
}

/// A solved state. Values are relative to the state: traversals or rounds
/// still to come. `cut` records whether the horizon truncated the subtree,
/// in which case the value only holds for the same number of rounds left.
#[derive(Copy, Clone, Debug)]
struct Entry {
    score: WorstCaseScore,
    remaining: u64,
    cut: bool,
}

/// Adversary choices for one round, fault-free first.
fn choices(world: &World, decided: &[Decided; 2], c: u64) -> Vec<Choice> {
    let can_fault = |a: usize| {
        matches!(&decided[a], Some((act, _)) if act.is_move()) && world.agents[a].fault_run < c
    };
    let opts = |a: usize| {
        if can_fault(a) {
            vec![FaultDecision::Allow, FaultDecision::Fault]
        } else {
            vec![FaultDecision::Allow]
        }
    };
    let mut out = Vec::with_capacity(4);
    for &d0 in &opts(0) {
        for &d1 in &opts(1) {
            out.push([d0, d1]);
        }
    }
    out
}

/// Relative score of a finished state and whether it depends on the
/// horizon, or `None` if the execution continues.
fn terminal(world: &World, horizon: u64, objective: Objective) -> Option<(WorstCaseScore, bool)> {
    let remaining = horizon.saturating_sub(world.round);
    if world.met.is_some() {
        return Some((
            WorstCaseScore {
                unmet: false,
                value: 0,
            },
            false,
        ));
    }
    if remaining == 0 || world.frozen() {
        let (value, cut) = match objective {
            Objective::MaxCost => (0, remaining == 0),
            Objective::PreventMeeting => (remaining, true),
        };
        return Some((WorstCaseScore { unmet: true, value }, cut));
    }
    None
}

impl Dfs {
    fn value(&mut self, world: World) -> Result<WorstCaseScore> {
        Ok(self.solve(world)?.0)
    }

    /// Best relative score reachable from `world`, and whether the horizon
    /// limited it.
    fn solve(&mut self, mut world: World) -> Result<(WorstCaseScore, bool)> {
        let remaining = self.horizon.saturating_sub(world.round);
        let key = world.fingerprint();
        if let Some(e) = self.memo.get(&key) {
            if !e.cut || e.remaining == remaining {
                return Ok((e.score, e.cut));
            }
        }
        world.check_wake_meeting();
        if let Some(t) = terminal(&world, self.horizon, self.objective) {
            return Ok(t);
        }
        if self.memo.len() >= self.ceiling {
            return Err(Error::ResourceLimit(format!(
                "more than {} search states",
                self.ceiling
            )));
        }
        let decided = world.decide()?;
        let mut best: Option<WorstCaseScore> = None;
        let mut cut = false;
        for choice in choices(&world, &decided, self.c) {
            let (score, child_cut) = self.child(&world, &decided, choice)?;
            cut |= child_cut;
            if best.is_none_or(|b| score > b) {
                best = Some(score);
            }
        }
        let score = best.expect("at least the fault-free choice");
        self.memo.insert(
            key,
            Entry {
                score,
                remaining,
                cut,
            },
        );
        Ok((score, cut))
    }

    /// Score of taking `choice` in `world`, counted from `world`.
    fn child(
        &mut self,
        world: &World,
        decided: &[Decided; 2],
        choice: Choice,
    ) -> Result<(WorstCaseScore, bool)> {
        let mut next = world.clone();
        next.apply(decided.clone(), choice, Some(self.c), None, None)?;
        let gained = match self.objective {
            Objective::MaxCost => next.cost() - world.cost(),
            Objective::PreventMeeting => 1,
        };
        let (mut score, cut) = self.solve(next)?;
        score.value += gained;
        Ok((score, cut))
    }

    /// Walks down from the root taking a best choice at every state.
    fn replay(&mut self, mut world: World, root: WorstCaseScore) -> Result<WorstCase> {
        let mut schedule = FaultSchedule::new();
        loop {
            world.check_wake_meeting();
            if terminal(&world, self.horizon, self.objective).is_some() {
                break;
            }
            let decided = world.decide()?;
            let mut best: Option<(WorstCaseScore, Choice)> = None;
            for choice in choices(&world, &decided, self.c) {
                let (score, _) = self.child(&world, &decided, choice)?;
                if best.is_none_or(|(b, _)| score > b) {
                    best = Some((score, choice));
                }
            }
            let (_, choice) = best.expect("at least the fault-free choice");
            record(&mut schedule, &world, &decided, choice);
            world.apply(decided, choice, Some(self.c), None, None)?;
        }
        Ok(WorstCase {
            objective: self.objective,
            score: root,
            met: world.met.is_some(),
            meeting_round: world.met.map(|m| m.0),
            cost: world.cost(),
            schedule,
            states: self.memo.len(),
            method: SearchMethod::Exhaustive,
        })
    }
}

fn record(schedule: &mut FaultSchedule, world: &World, decided: &[Decided; 2], choice: Choice) {
    for a in 0..2 {
        let moving = matches!(&decided[a], Some((act, _)) if act.is_move());
        if moving && choice[a] == FaultDecision::Fault {
            schedule.set(world.round, a, FaultDecision::Fault);
        }
    }
}

/// Keeps the `width` most promising states per round: unmet first, then the
/// largest objective value so far.
fn beam(
    root: World,
    c: u64,
    horizon: u64,
    objective: Objective,
    limits: SearchLimits,
) -> WorstCase {
    let progress = |w: &World| match objective {
        Objective::MaxCost => w.cost(),
        Objective::PreventMeeting => w.round,
    };
    let mut frontier = vec![(root, FaultSchedule::new())];
    let mut best: Option<(WorstCaseScore, World, FaultSchedule)> = None;
    let mut states = 0usize;
    let consider =
        |w: World, s: FaultSchedule, best: &mut Option<(WorstCaseScore, World, FaultSchedule)>| {
            let score = WorstCaseScore {
                unmet: w.met.is_none(),
                value: match (objective, w.met) {
                    (Objective::MaxCost, _) => w.cost(),
                    (Objective::PreventMeeting, Some((r, _))) => r,
                    (Objective::PreventMeeting, None) => horizon,
                },
            };
            if best.as_ref().is_none_or(|(b, _, _)| score > *b) {
                *best = Some((score, w, s));
            }
        };
    while !frontier.is_empty() {
        let mut next = Vec::new();
        let mut seen = FxHashSet::default();
        for (mut w, s) in frontier {
            w.check_wake_meeting();
            if terminal(&w, horizon, objective).is_some() {
                consider(w, s, &mut best);
                continue;
            }
            let Ok(decided) = w.decide() else { continue };
            for choice in choices(&w, &decided, c) {
                let mut child = w.clone();
                if child
                    .apply(decided.clone(), choice, Some(c), None, None)
                    .is_err()
                {
                    continue;
                }
                states += 1;
                if seen.insert(child.fingerprint()) {
                    let mut cs = s.clone();
                    record(&mut cs, &w, &decided, choice);
                    next.push((child, cs));
                }
            }
        }
        next.sort_by_key(|(w, _)| std::cmp::Reverse((w.met.is_none(), progress(w))));
        next.truncate(limits.beam_width);
        frontier = next;
    }
    let (score, w, schedule) = best.expect("the root is scored");
    WorstCase {
        objective,
        score,
        met: w.met.is_some(),
        meeting_round: w.met.map(|m| m.0),
        cost: w.cost(),
        schedule,
        states,
        method: SearchMethod::Beam {
            width: limits.beam_width,
        },
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::algorithms::{AlwaysAttack, Stay};
    use crate::engine::AgentSpec;
    use crate::graph::{NodeId, PortGraph};

    fn cfg(horizon: u64) -> RunConfig {
        let spec = |label, start| AgentSpec {
            label,
            start: NodeId(start),
            wake: 0,
        };
        let mut cfg = RunConfig::new(
            Arc::new(PortGraph::path(3).unwrap()),
            [spec(1, 0), spec(2, 2)],
        );
        cfg.horizon = horizon;
        cfg
    }

    #[test]
    fn horizon_zero_is_empty() {
        let w = worst_case_search(
            &cfg(0),
            [Box::new(Stay), Box::new(Stay)],
            1,
            Objective::MaxCost,
            SearchLimits::default(),
        )
        .unwrap();
        assert_eq!(
            w.score,
            WorstCaseScore {
                unmet: true,
                value: 0
            }
        );
        assert!(w.schedule.is_empty());
    }

    #[test]
    fn delays_a_walker_toward_a_sitter() {
        // agent 0 walks 0 -> 1 -> 2 where agent 1 sits
        let w = worst_case_search(
            &cfg(10),
            [Box::new(AlwaysAttack { port: 1 }), Box::new(Stay)],
            2,
            Objective::PreventMeeting,
            SearchLimits::default(),
        )
        .unwrap();
        assert_eq!(w.method, SearchMethod::Exhaustive);
        assert!(w.met);
        assert_eq!(w.score.value, 6);
        assert_eq!(w.schedule.fault_rounds(0), vec![0, 1, 3, 4]);
    }

    #[test]
    fn beam_fallback_is_flagged() {
        let limits = SearchLimits {
            state_ceiling: 2,
            beam_width: 4,
        };
        let w = worst_case_search(
            &cfg(12),
            [Box::new(AlwaysAttack { port: 0 }), Box::new(Stay)],
            1,
            Objective::MaxCost,
            limits,
        )
        .unwrap();
        assert_eq!(w.method, SearchMethod::Beam { width: 4 });
    }
}
