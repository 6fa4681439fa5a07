//! Simple programs for probing adversaries and the engine.

use crate::graph::Port;
use crate::program::{outcome, Action, Observation, Outcome, Program};

/// Never moves.
#[derive(Copy, Clone, Debug, Default, Hash, PartialEq, Eq)]
pub struct Stay;

impl Program for Stay {
    fn decide(&mut self, _obs: &Observation) -> Action {
        Action::Idle
    }

    fn halted(&self) -> bool {
        true
    }
}

/// Tries to move by `port` (modulo the degree) every round.
#[derive(Copy, Clone, Debug, Hash, PartialEq, Eq)]
pub struct AlwaysAttack {
    pub port: Port,
}

impl Program for AlwaysAttack {
    fn decide(&mut self, obs: &Observation) -> Action {
        if obs.degree == 0 {
            return Action::Idle;
        }
        Action::Move(self.port % obs.degree as Port)
    }
}

/// Makes `k` moves by `port`, each retried until it succeeds, then
/// alternates a move attempt with an idle round forever.
#[derive(Copy, Clone, Debug, Hash, PartialEq, Eq)]
pub struct FiniteAttack {
    pub k: u64,
    pub port: Port,
    done: u64,
    last: Action,
}

impl FiniteAttack {
    pub fn new(k: u64, port: Port) -> Self {
        Self {
            k,
            port,
            done: 0,
            last: Action::Idle,
        }
    }
}

impl Program for FiniteAttack {
    fn decide(&mut self, obs: &Observation) -> Action {
        let moved = matches!(outcome(self.last, obs), Outcome::Moved { .. });
        if moved && self.done < self.k {
            self.done += 1;
        }
        self.last = if obs.degree == 0 {
            Action::Idle
        } else if self.done < self.k || !self.last.is_move() {
            Action::Move(self.port % obs.degree as Port)
        } else {
            Action::Idle
        };
        self.last
    }
}

/// Plays a fixed list of actions, then idles.
#[derive(Clone, Debug, Hash, PartialEq, Eq)]
pub struct Scripted {
    actions: Vec<Action>,
    next: usize,
}

impl Scripted {
    pub fn new(actions: Vec<Action>) -> Self {
        Self { actions, next: 0 }
    }
}

impl Program for Scripted {
    fn decide(&mut self, _obs: &Observation) -> Action {
        let a = self.actions.get(self.next).copied().unwrap_or(Action::Idle);
        self.next += 1;
        a
    }

    fn halted(&self) -> bool {
        self.next >= self.actions.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_attack_then_alternates() {
        let mut p = FiniteAttack::new(2, 0);
        let start = Observation::at_start(1);
        let blocked = Observation {
            fault: true,
            ..start
        };
        let moved = Observation {
            entry_port: Some(0),
            ..start
        };
        assert_eq!(p.decide(&start), Action::Move(0));
        assert_eq!(p.decide(&blocked), Action::Move(0));
        assert_eq!(p.decide(&moved), Action::Move(0));
        assert_eq!(p.decide(&moved), Action::Idle);
        assert_eq!(p.decide(&moved), Action::Move(0));
        assert_eq!(p.decide(&blocked), Action::Idle);
    }
}
