//! What an agent sees each round and what it may do.

use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::graph::Port;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Idle,
    Move(Port),
}

impl Action {
    pub fn is_move(self) -> bool {
        matches!(self, Action::Move(_))
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Idle => f.write_str("idle"),
            Action::Move(p) => write!(f, "move {p}"),
        }
    }
}

/// Local view of an agent at the start of a round.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Observation {
    pub degree: usize,
    /// Port by which the agent entered its current node on its latest
    /// successful move; `None` until it first moves.
    pub entry_port: Option<Port>,
    /// The move decided in the previous round was blocked.
    pub fault: bool,
    pub met: bool,
}

impl Observation {
    pub fn at_start(degree: usize) -> Self {
        Self {
            degree,
            entry_port: None,
            fault: false,
            met: false,
        }
    }
}

/// A deterministic per-round decision machine. Implementors only need
/// value semantics; [`AgentProgram`] is derived for them.
pub trait Program: Clone + Hash + fmt::Debug + Send + 'static {
    /// Called once per round while the agent is awake and rendezvous has not
    /// happened. The observation reports the outcome of the previous decision.
    fn decide(&mut self, obs: &Observation) -> Action;

    /// True once the program will only ever stay idle.
    fn halted(&self) -> bool {
        false
    }

    /// A note for the trace about the decision just made, if any.
    fn take_note(&mut self) -> Option<String> {
        None
    }
}

/// Object-safe form of [`Program`], used wherever programs are chosen at run
/// time. The fingerprint hashes the complete decision-relevant state, so two
/// programs with equal fingerprints behave identically from here on.
pub trait AgentProgram: Send {
    fn decide(&mut self, obs: &Observation) -> Action;
    fn halted(&self) -> bool;
    fn take_note(&mut self) -> Option<String>;
    fn clone_box(&self) -> Box<dyn AgentProgram>;
    fn fingerprint(&self, state: &mut dyn Hasher);
    fn describe(&self) -> String;
}

impl<T: Program> AgentProgram for T {
    fn decide(&mut self, obs: &Observation) -> Action {
        Program::decide(self, obs)
    }

    fn halted(&self) -> bool {
        Program::halted(self)
    }

    fn take_note(&mut self) -> Option<String> {
        Program::take_note(self)
    }

    fn clone_box(&self) -> Box<dyn AgentProgram> {
        Box::new(self.clone())
    }

    fn fingerprint(&self, mut state: &mut dyn Hasher) {
        self.hash(&mut state);
    }

    fn describe(&self) -> String {
        format!("{self:?}")
    }
}

pub type BoxedProgram = Box<dyn AgentProgram>;

impl Clone for BoxedProgram {
    fn clone(&self) -> Self {
        (**self).clone_box()
    }
}

impl Hash for BoxedProgram {
    fn hash<H: Hasher>(&self, state: &mut H) {
        (**self).fingerprint(state);
    }
}

impl fmt::Debug for BoxedProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&(**self).describe())
    }
}

impl Program for BoxedProgram {
    fn decide(&mut self, obs: &Observation) -> Action {
        (**self).decide(obs)
    }

    fn halted(&self) -> bool {
        (**self).halted()
    }

    fn take_note(&mut self) -> Option<String> {
        (**self).take_note()
    }
}

/// Feedback on the previous decision, derived from an observation.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Outcome {
    Idled,
    Moved { entry: Port },
    Blocked,
}

pub(crate) fn outcome(last: Action, obs: &Observation) -> Outcome {
    match last {
        Action::Idle => Outcome::Idled,
        Action::Move(_) if obs.fault => Outcome::Blocked,
        Action::Move(_) => Outcome::Moved {
            entry: obs
                .entry_port
                .expect("a successful move sets the entry port"),
        },
    }
}
