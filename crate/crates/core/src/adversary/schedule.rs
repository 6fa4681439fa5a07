//! Explicit fault schedules: parsing, validation and replay.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Adversary, AgentView, FaultDecision, FaultModel};
use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct ScheduleEntry {
    pub round: u64,
    pub agent: usize,
    pub decision: FaultDecision,
}

/// Per-round, per-agent decisions. Pairs not listed are allowed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FaultSchedule {
    entries: BTreeMap<(u64, usize), FaultDecision>,
}

impl FaultSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = ScheduleEntry>) -> Self {
        let mut s = Self::new();
        for e in entries {
            s.set(e.round, e.agent, e.decision);
        }
        s
    }

    /// Faults for `agent` in every listed round.
    pub fn faults(agent: usize, rounds: impl IntoIterator<Item = u64>) -> Self {
        Self::from_entries(rounds.into_iter().map(|round| ScheduleEntry {
            round,
            agent,
            decision: FaultDecision::Fault,
        }))
    }

    pub fn set(&mut self, round: u64, agent: usize, decision: FaultDecision) {
        self.entries.insert((round, agent), decision);
    }

    pub fn get(&self, round: u64, agent: usize) -> FaultDecision {
        self.entries
            .get(&(round, agent))
            .copied()
            .unwrap_or(FaultDecision::Allow)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = ScheduleEntry> + '_ {
        self.entries
            .iter()
            .map(|(&(round, agent), &decision)| ScheduleEntry {
                round,
                agent,
                decision,
            })
    }

    /// Rounds in which `agent` is blocked, ascending.
    pub fn fault_rounds(&self, agent: usize) -> Vec<u64> {
        self.entries()
            .filter(|e| e.agent == agent && e.decision == FaultDecision::Fault)
            .map(|e| e.round)
            .collect()
    }

    /// Parses lines `round agent decision` with decision `allow` or `fault`.
    /// Blank lines and text after `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Self::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line, message };
            let fields: Vec<&str> = body.split_whitespace().collect();
            let [round, agent, decision] = fields[..] else {
                return Err(err(format!(
                    "expected `round agent decision`, got `{body}`"
                )));
            };
            let round: u64 = round
                .parse()
                .map_err(|_| err(format!("bad round `{round}`")))?;
            let agent: usize = match agent.parse() {
                Ok(a @ (0 | 1)) => a,
                _ => return Err(err(format!("agent must be 0 or 1, got `{agent}`"))),
            };
            let decision = match decision {
                "allow" => FaultDecision::Allow,
                "fault" => FaultDecision::Fault,
                other => {
                    return Err(err(format!(
                        "decision must be allow or fault, got `{other}`"
                    )))
                }
            };
            if s.entries.insert((round, agent), decision).is_some() {
                return Err(err(format!(
                    "duplicate entry for round {round} agent {agent}"
                )));
            }
        }
        Ok(s)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in self.entries() {
            let d = match e.decision {
                FaultDecision::Allow => "allow",
                FaultDecision::Fault => "fault",
            };
            writeln!(out, "{} {} {d}", e.round, e.agent).unwrap();
        }
        out
    }

    /// Rejects schedules that block an agent in more consecutive rounds than
    /// the model allows. Random models accept any schedule.
    pub fn validate(&self, model: &FaultModel) -> Result<()> {
        model.validate()?;
        let Some(c) = model.bound() else {
            return Ok(());
        };
        for agent in 0..2 {
            let mut run = 0u64;
            let mut prev: Option<u64> = None;
            for r in self.fault_rounds(agent) {
                run = if prev == Some(r.wrapping_sub(1)) {
                    run + 1
                } else {
                    1
                };
                prev = Some(r);
                if run > c {
                    return Err(Error::ScheduleRejected {
                        round: r,
                        agent,
                        reason: format!("{run} consecutive faults exceed the bound {c}"),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Replays a validated schedule; rounds past its end allow everything.
#[derive(Clone, Debug)]
pub struct Scripted {
    schedule: FaultSchedule,
    model: FaultModel,
}

impl Scripted {
    pub fn new(schedule: FaultSchedule, model: FaultModel) -> Result<Self> {
        schedule.validate(&model)?;
        Ok(Self { schedule, model })
    }

    pub fn schedule(&self) -> &FaultSchedule {
        &self.schedule
    }
}

impl Adversary for Scripted {
    fn model(&self) -> FaultModel {
        self.model
    }

    fn decide(&mut self, round: u64, _views: &[AgentView; 2]) -> [FaultDecision; 2] {
        [self.schedule.get(round, 0), self.schedule.get(round, 1)]
    }

    fn describe(&self) -> String {
        format!("scripted({} entries, {})", self.schedule.len(), self.model)
    }
}
