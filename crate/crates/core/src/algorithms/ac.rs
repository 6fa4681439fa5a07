//! Stretching a fault-free algorithm into one that tolerates at most `c`
//! consecutive faults per agent.

use crate::error::{invalid, Result};
use crate::program::{outcome, Action, Observation, Outcome, Program};

/// Replaces every round of `base` by a segment of `2c+1` rounds. A move is
/// attempted in each round of its segment until it succeeds, after which the
/// agent idles until the segment ends. The base program sees one observation
/// per segment, with `fault` set when its move never went through.
#[derive(Clone, Debug, Hash)]
pub struct AcWrapper<P: Program> {
    base: P,
    c: u64,
    pos: u64,
    base_action: Action,
    moved: bool,
    last: Action,
}

impl<P: Program> AcWrapper<P> {
    pub fn new(base: P, c: u64) -> Result<Self> {
        if c == 0 {
            return Err(invalid("fault bound must be at least 1"));
        }
        Ok(Self {
            base,
            c,
            pos: 0,
            base_action: Action::Idle,
            moved: false,
            last: Action::Idle,
        })
    }

    pub fn segment_len(&self) -> u64 {
        2 * self.c + 1
    }

    pub fn base(&self) -> &P {
        &self.base
    }
}

impl<P: Program> Program for AcWrapper<P> {
    fn decide(&mut self, obs: &Observation) -> Action {
        if let Outcome::Moved { .. } = outcome(self.last, obs) {
            self.moved = true;
        }
        if self.pos == 0 {
            let base_obs = Observation {
                fault: self.base_action.is_move() && !self.moved,
                ..*obs
            };
            self.base_action = self.base.decide(&base_obs);
            self.moved = false;
        }
        let action = match self.base_action {
            Action::Move(p) if !self.moved => Action::Move(p),
            _ => Action::Idle,
        };
        self.pos = (self.pos + 1) % self.segment_len();
        self.last = action;
        action
    }

    fn halted(&self) -> bool {
        self.pos == 0 && self.base.halted()
    }

    fn take_note(&mut self) -> Option<String> {
        self.base.take_note()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::Scripted;

    #[test]
    fn idle_round_becomes_idle_segment() {
        let mut w = AcWrapper::new(Scripted::new(vec![Action::Idle]), 2).unwrap();
        let obs = Observation::at_start(2);
        for _ in 0..5 {
            assert_eq!(Program::decide(&mut w, &obs), Action::Idle);
        }
    }

    #[test]
    fn move_retries_within_segment() {
        let mut w = AcWrapper::new(Scripted::new(vec![Action::Move(1)]), 1).unwrap();
        let start = Observation::at_start(2);
        assert_eq!(Program::decide(&mut w, &start), Action::Move(1));
        let blocked = Observation {
            fault: true,
            ..start
        };
        assert_eq!(Program::decide(&mut w, &blocked), Action::Move(1));
        let moved = Observation {
            entry_port: Some(0),
            ..start
        };
        assert_eq!(Program::decide(&mut w, &moved), Action::Idle);
        // next segment: the script is exhausted
        assert_eq!(Program::decide(&mut w, &moved), Action::Idle);
    }
}
