//! Rendezvous with unbounded faults when an upper bound `m` on the graph
//! size is known: repeat the round trip of the size-`m` exploration
//! sequence `(P(m)+1)^λ` times, then stop.

use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::program::{outcome, Action, Observation, Outcome, Program};
use crate::uxs::{RoundTrip, UxsLibrary};

#[derive(Clone, Debug)]
pub struct KnownBound {
    terms: Arc<Vec<u32>>,
    reps_left: u64,
    trip: RoundTrip,
    pending: Option<Action>,
    last: Action,
}

impl KnownBound {
    pub fn new(label: u64, m: usize, library: &UxsLibrary) -> Result<Self> {
        if label == 0 {
            return Err(invalid("label must be positive"));
        }
        let uxs = library
            .get(m)
            .ok_or_else(|| invalid(format!("no exploration sequence for size {m}")))?;
        let reps = u32::try_from(label)
            .ok()
            .and_then(|e| (uxs.len() as u64 + 1).checked_pow(e))
            .filter(|r| r.checked_mul(2 * uxs.len() as u64).is_some())
            .ok_or_else(|| {
                Error::ResourceLimit(format!("(P({m})+1)^{label} repetitions overflow"))
            })?;
        Ok(Self {
            terms: Arc::new(uxs.terms.clone()),
            reps_left: if uxs.is_empty() { 0 } else { reps },
            trip: RoundTrip::new(),
            pending: None,
            last: Action::Idle,
        })
    }

    /// Total traversals of a fault-free execution.
    pub fn total_traversals(&self) -> u64 {
        self.reps_left * 2 * self.terms.len() as u64
    }
}

impl Program for KnownBound {
    fn decide(&mut self, obs: &Observation) -> Action {
        match outcome(self.last, obs) {
            Outcome::Blocked => {}
            _ => self.pending = None,
        }
        if self.pending.is_none() && self.reps_left > 0 && obs.degree > 0 {
            if self.trip.finished(&self.terms) {
                self.trip.reset();
            }
            let port = self.trip.next_port(&self.terms, obs.degree, obs.entry_port);
            if self.trip.finished(&self.terms) {
                self.reps_left -= 1;
            }
            self.pending = Some(Action::Move(port));
        }
        self.last = self.pending.unwrap_or(Action::Idle);
        self.last
    }

    fn halted(&self) -> bool {
        self.reps_left == 0 && self.pending.is_none()
    }
}

impl Hash for KnownBound {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.terms.len().hash(state);
        self.reps_left.hash(state);
        self.trip.hash(state);
        self.pending.hash(state);
        self.last.hash(state);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn traversal_counts() {
        let lib = UxsLibrary::shipped();
        assert_eq!(KnownBound::new(1, 2, &lib).unwrap().total_traversals(), 4);
        assert_eq!(KnownBound::new(3, 2, &lib).unwrap().total_traversals(), 16);
        assert!(matches!(
            KnownBound::new(1000, 5, &lib),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn blocked_moves_are_repeated() {
        let lib = UxsLibrary::shipped();
        let mut p = KnownBound::new(1, 2, &lib).unwrap();
        let start = Observation::at_start(1);
        assert_eq!(Program::decide(&mut p, &start), Action::Move(0));
        let blocked = Observation {
            fault: true,
            ..start
        };
        assert_eq!(Program::decide(&mut p, &blocked), Action::Move(0));
        let moved = Observation {
            entry_port: Some(0),
            ..start
        };
        let mut moves = 1;
        while Program::decide(&mut p, &moved).is_move() {
            moves += 1;
        }
        assert_eq!(moves, 4);
        assert!(Program::halted(&p));
    }
}
