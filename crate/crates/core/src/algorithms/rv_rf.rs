//! Rendezvous under random faults: walk steps interleaved with dances on the
//! edge just crossed, and a repair routine whenever a dance is disturbed.

use std::hash::{Hash, Hasher};
use std::sync::Arc;

use super::dance::{dance_script, modified_label, EdgeStep};
use crate::asynch::AsynchWalk;
use crate::error::{invalid, Result};
use crate::graph::Port;
use crate::program::{outcome, Action, Observation, Outcome, Program};

pub const CORRECTION_IDLE: usize = 20;
pub const CORRECTION_CROSSINGS: usize = 20;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum RvRfPhase {
    /// About to take the next walk step.
    NextStage,
    /// Crossing the walk edge by `port`, retrying until it succeeds.
    Traverse { port: Port },
    /// Executing round `round` of the dance.
    Dance { round: usize },
    /// Repair after a fault: `round` counts rounds since the (re)start,
    /// `home_at_y` records which endpoint the dance fault happened at, and
    /// `resume` is the dance round to re-execute afterwards.
    Correction {
        round: usize,
        home_at_y: bool,
        resume: usize,
    },
}

#[derive(Clone, Debug)]
pub struct RvRf<W: AsynchWalk> {
    walk: W,
    steps: Arc<Vec<EdgeStep>>,
    phase: RvRfPhase,
    /// Whether the agent is at the far end `y` of the current walk edge.
    at_y: bool,
    port_at_x: Port,
    port_at_y: Port,
    walk_entry: Option<Port>,
    last: Action,
    stages: u64,
    corrections: u64,
    note: Option<String>,
}

impl<W: AsynchWalk> RvRf<W> {
    pub fn new(label: u64, walk: W) -> Result<Self> {
        if walk.label() != label {
            return Err(invalid(format!(
                "walk is labeled {}, program {label}",
                walk.label()
            )));
        }
        let steps = dance_script(&modified_label(label)?).steps;
        Ok(Self {
            walk,
            steps: Arc::new(steps),
            phase: RvRfPhase::NextStage,
            at_y: false,
            port_at_x: 0,
            port_at_y: 0,
            walk_entry: None,
            last: Action::Idle,
            stages: 0,
            corrections: 0,
            note: None,
        })
    }

    pub fn phase(&self) -> RvRfPhase {
        self.phase
    }

    /// Walk steps started so far.
    pub fn stages(&self) -> u64 {
        self.stages
    }

    /// Repair routines started so far, restarts included.
    pub fn corrections(&self) -> u64 {
        self.corrections
    }

    fn cross(&self) -> Action {
        Action::Move(if self.at_y {
            self.port_at_y
        } else {
            self.port_at_x
        })
    }

    fn absorb(&mut self, out: Outcome) {
        use RvRfPhase::*;
        self.phase = match (self.phase, out) {
            (Traverse { port }, Outcome::Moved { entry }) => {
                self.port_at_x = port;
                self.port_at_y = entry;
                self.at_y = true;
                self.walk_entry = Some(entry);
                Dance { round: 0 }
            }
            (Dance { round }, Outcome::Moved { .. }) => {
                self.at_y = !self.at_y;
                Dance { round: round + 1 }
            }
            (Dance { round }, Outcome::Idled) => Dance { round: round + 1 },
            (Dance { round }, Outcome::Blocked) => {
                self.corrections += 1;
                self.note = Some(format!("correction after fault in dance round {round}"));
                Correction {
                    round: 0,
                    home_at_y: self.at_y,
                    resume: round,
                }
            }
            (
                Correction {
                    round,
                    home_at_y,
                    resume,
                },
                Outcome::Moved { .. },
            ) => {
                self.at_y = !self.at_y;
                Correction {
                    round: round + 1,
                    home_at_y,
                    resume,
                }
            }
            (
                Correction {
                    round,
                    home_at_y,
                    resume,
                },
                Outcome::Idled,
            ) => Correction {
                round: round + 1,
                home_at_y,
                resume,
            },
            (
                Correction {
                    home_at_y, resume, ..
                },
                Outcome::Blocked,
            ) => {
                self.corrections += 1;
                self.note = Some("correction restarted".into());
                Correction {
                    round: 0,
                    home_at_y,
                    resume,
                }
            }
            (phase, _) => phase,
        };
    }
}

impl<W: AsynchWalk> Program for RvRf<W> {
    fn decide(&mut self, obs: &Observation) -> Action {
        let out = outcome(self.last, obs);
        self.absorb(out);
        let action = loop {
            match self.phase {
                RvRfPhase::NextStage => {
                    let port = self.walk.next_port(obs.degree, self.walk_entry);
                    self.stages += 1;
                    self.phase = RvRfPhase::Traverse { port };
                }
                RvRfPhase::Traverse { port } => break Action::Move(port),
                RvRfPhase::Dance { round } => match self.steps.get(round) {
                    None => self.phase = RvRfPhase::NextStage,
                    Some(EdgeStep::Idle) => break Action::Idle,
                    Some(EdgeStep::Cross) => break self.cross(),
                },
                RvRfPhase::Correction {
                    round,
                    home_at_y,
                    resume,
                } => {
                    if round < CORRECTION_IDLE {
                        break Action::Idle;
                    }
                    if round < CORRECTION_IDLE + CORRECTION_CROSSINGS || self.at_y != home_at_y {
                        break self.cross();
                    }
                    let note = format!("resume dance round {resume} after {round} rounds");
                    self.note = Some(match self.note.take() {
                        Some(n) => format!("{n}; {note}"),
                        None => note,
                    });
                    self.phase = RvRfPhase::Dance { round: resume };
                }
            }
        };
        self.last = action;
        action
    }

    fn take_note(&mut self) -> Option<String> {
        self.note.take()
    }
}

impl<W: AsynchWalk> Hash for RvRf<W> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.walk.hash(state);
        self.phase.hash(state);
        self.at_y.hash(state);
        self.port_at_x.hash(state);
        self.port_at_y.hash(state);
        self.walk_entry.hash(state);
        self.last.hash(state);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asynch::DefaultAsynchWalk;
    use crate::uxs::UxsLibrary;

    fn program(label: u64) -> RvRf<DefaultAsynchWalk> {
        let walk = DefaultAsynchWalk::new(label, Arc::new(UxsLibrary::shipped())).unwrap();
        RvRf::new(label, walk).unwrap()
    }

    fn obs(entry: Option<Port>, fault: bool) -> Observation {
        Observation {
            degree: 1,
            entry_port: entry,
            fault,
            met: false,
        }
    }

    #[test]
    fn fault_free_stage_on_an_edge() {
        let mut p = program(1);
        let mut actions = vec![Program::decide(&mut p, &Observation::at_start(1))];
        for _ in 0..34 {
            actions.push(Program::decide(&mut p, &obs(Some(0), false)));
        }
        assert_eq!(actions[0], Action::Move(0));
        assert_eq!(&actions[1..11], &[Action::Idle; 10]);
        assert_eq!(actions.iter().filter(|a| a.is_move()).count(), 1 + 18);
        assert_eq!(p.stages(), 1);
    }

    #[test]
    fn single_dance_fault_costs_forty_rounds() {
        let mut p = program(1);
        Program::decide(&mut p, &Observation::at_start(1));
        for _ in 0..10 {
            Program::decide(&mut p, &obs(Some(0), false));
        }
        // dance round 10 is the first crossing
        assert_eq!(
            Program::decide(&mut p, &obs(Some(0), false)),
            Action::Move(0)
        );
        let mut rounds = 0;
        let mut fault = true;
        loop {
            let a = Program::decide(&mut p, &obs(Some(0), fault));
            fault = false;
            if let RvRfPhase::Dance { round } = p.phase() {
                assert_eq!(round, 10);
                assert_eq!(a, Action::Move(0));
                break;
            }
            rounds += 1;
        }
        assert_eq!(rounds, 40);
        assert_eq!(p.corrections(), 1);
    }
}
