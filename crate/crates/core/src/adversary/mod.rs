//! Fault injection: which attempted moves are blocked in each round.

mod schedule;
mod search;

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::NodeId;
use crate::program::Action;

pub use schedule::{FaultSchedule, ScheduleEntry, Scripted};
pub use search::{
    worst_case_search, Objective, SearchLimits, SearchMethod, WorstCase, WorstCaseScore,
};

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FaultModel {
    /// Each attempted move fails independently with probability `p`.
    Random { p: f64 },
    /// No agent is blocked in more than `c` consecutive rounds.
    Bounded { c: u64 },
    /// Every run of consecutive faults is finite.
    Unbounded,
}

impl FaultModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FaultModel::Random { p } if !(p > 0.0 && p < 1.0) => Err(invalid(format!(
                "fault probability {p} must lie strictly between 0 and 1"
            ))),
            FaultModel::Bounded { c: 0 } => Err(invalid("fault bound must be at least 1")),
            _ => Ok(()),
        }
    }

    /// Largest allowed run of consecutive faults, if bounded.
    pub fn bound(&self) -> Option<u64> {
        match *self {
            FaultModel::Bounded { c } => Some(c),
            _ => None,
        }
    }
}

impl fmt::Display for FaultModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaultModel::Random { p } => write!(f, "random({p})"),
            FaultModel::Bounded { c } => write!(f, "bounded({c})"),
            FaultModel::Unbounded => f.write_str("unbounded"),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultDecision {
    Allow,
    Fault,
}

/// What the adversary sees of one agent in the current round.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct AgentView {
    pub awake: bool,
    pub node: NodeId,
    /// The agent's decision this round; `Idle` while dormant.
    pub action: Action,
    /// Consecutive blocked rounds just before this one.
    pub fault_run: u64,
}

/// Decides, per round, which of the attempted moves fail. Decisions for
/// agents that do not attempt a move are ignored.
pub trait Adversary: Send {
    fn model(&self) -> FaultModel;
    fn decide(&mut self, round: u64, views: &[AgentView; 2]) -> [FaultDecision; 2];
    fn describe(&self) -> String;
}

/// Never blocks anything.
#[derive(Clone, Debug, Default)]
pub struct NoFaults;

impl Adversary for NoFaults {
    fn model(&self) -> FaultModel {
        FaultModel::Unbounded
    }

    fn decide(&mut self, _round: u64, _views: &[AgentView; 2]) -> [FaultDecision; 2] {
        [FaultDecision::Allow; 2]
    }

    fn describe(&self) -> String {
        "none".into()
    }
}

/// Independent faults with probability `p`, one seeded stream per agent.
/// A stream is only drawn from in rounds where its agent attempts a move, so
/// the fault pattern seen by an agent does not depend on the other agent.
#[derive(Clone, Debug)]
pub struct RandomFaults {
    p: f64,
    seed: u64,
    rngs: [ChaCha8Rng; 2],
}

impl RandomFaults {
    pub fn new(p: f64, seed: u64) -> Result<Self> {
        FaultModel::Random { p }.validate()?;
        let stream = |agent: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(agent);
            rng
        };
        Ok(Self {
            p,
            seed,
            rngs: [stream(0), stream(1)],
        })
    }

    /// Draws the fault decision for one move attempt by `agent`.
    pub fn draw(&mut self, agent: usize) -> FaultDecision {
        if self.rngs[agent].gen_bool(self.p) {
            FaultDecision::Fault
        } else {
            FaultDecision::Allow
        }
    }
}

impl Adversary for RandomFaults {
    fn model(&self) -> FaultModel {
        FaultModel::Random { p: self.p }
    }

    fn decide(&mut self, _round: u64, views: &[AgentView; 2]) -> [FaultDecision; 2] {
        let mut out = [FaultDecision::Allow; 2];
        for (a, v) in views.iter().enumerate() {
            if v.awake && v.action.is_move() {
                out[a] = self.draw(a);
            }
        }
        out
    }

    fn describe(&self) -> String {
        format!("random(p={}, seed={})", self.p, self.seed)
    }
}

/// Blocks every attempted move until the agent has been blocked `c` rounds
/// in a row, then lets one through.
#[derive(Clone, Debug)]
pub struct MaxDelay {
    c: u64,
}

impl MaxDelay {
    pub fn new(c: u64) -> Result<Self> {
        FaultModel::Bounded { c }.validate()?;
        Ok(Self { c })
    }
}

impl Adversary for MaxDelay {
    fn model(&self) -> FaultModel {
        FaultModel::Bounded { c: self.c }
    }

    fn decide(&mut self, _round: u64, views: &[AgentView; 2]) -> [FaultDecision; 2] {
        views.map(|v| {
            if v.fault_run < self.c {
                FaultDecision::Fault
            } else {
                FaultDecision::Allow
            }
        })
    }

    fn describe(&self) -> String {
        format!("max_delay(c={})", self.c)
    }
}

/// How the attack-detecting adversary lets attacking agents through.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Release {
    /// Attacking agents move together, once every agent attempting a move in
    /// the round has been blocked for `patience` rounds in a row.
    Synchronized,
    /// Each agent moves once it has been blocked for `patience` rounds in a row.
    Independent,
}

/// Blocks every move that is not part of a sustained attack: an agent gets
/// through only after attempting and being blocked in `patience` consecutive
/// rounds. Agents that keep interleaving idle rounds never move.
#[derive(Clone, Debug)]
pub struct Tough {
    patience: u64,
    release: Release,
}

pub const DEFAULT_PATIENCE: u64 = 64;

impl Tough {
    pub fn new(patience: u64, release: Release) -> Result<Self> {
        if patience == 0 {
            return Err(invalid("patience must be at least 1"));
        }
        Ok(Self { patience, release })
    }
}

impl Adversary for Tough {
    fn model(&self) -> FaultModel {
        FaultModel::Unbounded
    }

    fn decide(&mut self, _round: u64, views: &[AgentView; 2]) -> [FaultDecision; 2] {
        let ready = |v: &AgentView| v.fault_run >= self.patience;
        let attacking = |v: &AgentView| v.awake && v.action.is_move();
        match self.release {
            Release::Independent => views.map(|v| {
                if ready(&v) {
                    FaultDecision::Allow
                } else {
                    FaultDecision::Fault
                }
            }),
            Release::Synchronized => {
                let all_ready = views.iter().filter(|v| attacking(v)).all(ready);
                [if all_ready {
                    FaultDecision::Allow
                } else {
                    FaultDecision::Fault
                }; 2]
            }
        }
    }

    fn describe(&self) -> String {
        format!(
            "tough(patience={}, release={:?})",
            self.patience, self.release
        )
    }
}
