//! Random walks driven by bits harvested from random faults.

use std::collections::VecDeque;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{invalid, Result};
use crate::graph::Port;
use crate::program::{outcome, Action, Observation, Outcome, Program};

/// Bit produced by two attempts along one edge: `1` if only the first
/// succeeded, `0` if only the second did, nothing otherwise.
pub fn urbp_bit(first_moved: bool, second_moved: bool) -> Option<u8> {
    match (first_moved, second_moved) {
        (true, false) => Some(1),
        (false, true) => Some(0),
        _ => None,
    }
}

/// One bit-production procedure in progress. The first attempt uses port 0;
/// the second goes back along the same edge if the first succeeded.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash)]
struct Urbp {
    /// `None` before the first attempt, then whether it succeeded.
    first: Option<bool>,
}

impl Urbp {
    fn first_action(&mut self) -> Action {
        self.first = None;
        Action::Move(0)
    }

    /// Records the first outcome and returns the second attempt.
    fn second_action(&mut self, first_moved: bool, entry: Option<Port>) -> Action {
        self.first = Some(first_moved);
        Action::Move(if first_moved { entry.unwrap_or(0) } else { 0 })
    }

    fn finish(&self, second_moved: bool) -> Option<u8> {
        urbp_bit(
            self.first.expect("second attempt follows the first"),
            second_moved,
        )
    }
}

/// Repeats bit production forever and keeps the bits, for measuring it.
#[derive(Clone, Debug, Default, Hash)]
pub struct UrbpProgram {
    state: Urbp,
    in_second: bool,
    last: Option<Action>,
    bits: Vec<u8>,
    calls: u64,
}

impl UrbpProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Completed procedures.
    pub fn calls(&self) -> u64 {
        self.calls
    }
}

impl Program for UrbpProgram {
    fn decide(&mut self, obs: &Observation) -> Action {
        if obs.degree == 0 {
            return Action::Idle;
        }
        let moved = self
            .last
            .map(|a| matches!(outcome(a, obs), Outcome::Moved { .. }))
            .unwrap_or(false);
        let action = if self.in_second {
            self.in_second = false;
            self.state.second_action(moved, obs.entry_port)
        } else {
            if self.last.is_some() {
                self.calls += 1;
                self.bits.extend(self.state.finish(moved));
            }
            self.in_second = true;
            self.state.first_action()
        };
        self.last = Some(action);
        action
    }
}

/// Rounds of the random walk in epoch `n`: `coef · n^exp`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct WalkLength {
    pub coef: u64,
    pub exp: u32,
}

impl WalkLength {
    pub fn eval(&self, n: u64) -> u64 {
        n.saturating_pow(self.exp).saturating_mul(self.coef)
    }
}

/// `⌈log2 x⌉` for `x ≥ 1`.
pub fn ceil_log2(x: u64) -> u32 {
    assert!(x >= 1);
    64 - (x - 1).leading_zeros()
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
enum HarvestStage {
    Preparation { calls_left: u64, second: bool },
    Execution { rounds_left: u64, exhausted: bool },
}

/// Epoch `n`: `n ⌈log2 n⌉ Q(n)` bit productions, then `Q(n)` rounds of a
/// random walk. At a node of degree `d` the walk reads `⌈log2 d⌉` bits, most
/// significant first, and tries port `i` if they encode `i < d`. An agent
/// that runs out of bits stays put for the rest of the epoch. Unused bits
/// are dropped when the epoch ends.
#[derive(Clone)]
pub struct Harvest {
    label: u64,
    q: WalkLength,
    epoch: u64,
    stage: HarvestStage,
    urbp: Urbp,
    bits: VecDeque<u8>,
    last: Action,
    harvested: u64,
    note: Option<String>,
}

impl Harvest {
    pub fn new(label: u64, q: WalkLength) -> Result<Self> {
        if label == 0 {
            return Err(invalid("label must be positive"));
        }
        let mut h = Self {
            label,
            q,
            epoch: 0,
            stage: HarvestStage::Execution {
                rounds_left: 0,
                exhausted: false,
            },
            urbp: Urbp::default(),
            bits: VecDeque::new(),
            last: Action::Idle,
            harvested: 0,
            note: None,
        };
        h.next_epoch();
        Ok(h)
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    /// Bits produced over all epochs.
    pub fn harvested(&self) -> u64 {
        self.harvested
    }

    /// Bit productions in the preparation part of epoch `n`.
    pub fn preparation_calls(q: WalkLength, n: u64) -> u64 {
        n.saturating_mul(ceil_log2(n) as u64)
            .saturating_mul(q.eval(n))
    }

    fn next_epoch(&mut self) {
        self.epoch += 1;
        self.bits.clear();
        let calls = Self::preparation_calls(self.q, self.epoch);
        self.stage = if calls > 0 {
            HarvestStage::Preparation {
                calls_left: calls,
                second: false,
            }
        } else {
            HarvestStage::Execution {
                rounds_left: self.q.eval(self.epoch),
                exhausted: false,
            }
        };
        self.note = Some(format!("epoch {}", self.epoch));
    }

    fn walk_action(&mut self, degree: usize) -> Option<Action> {
        if degree == 0 {
            return None;
        }
        let r = ceil_log2(degree as u64) as usize;
        if self.bits.len() < r {
            return None;
        }
        let i = self
            .bits
            .drain(..r)
            .fold(0usize, |acc, b| acc << 1 | b as usize);
        Some(if i < degree {
            Action::Move(i as Port)
        } else {
            Action::Idle
        })
    }
}

impl Program for Harvest {
    fn decide(&mut self, obs: &Observation) -> Action {
        self.settle(obs);
        let moved = matches!(outcome(self.last, obs), Outcome::Moved { .. });
        loop {
            match self.stage {
                HarvestStage::Preparation { calls_left: 0, .. } => {
                    self.stage = HarvestStage::Execution {
                        rounds_left: self.q.eval(self.epoch),
                        exhausted: false,
                    };
                }
                HarvestStage::Preparation { calls_left, second } => {
                    if obs.degree == 0 {
                        self.last = Action::Idle;
                        return self.last;
                    }
                    if !second {
                        self.stage = HarvestStage::Preparation {
                            calls_left,
                            second: true,
                        };
                        self.last = self.urbp.first_action();
                    } else {
                        self.stage = HarvestStage::Preparation {
                            calls_left,
                            second: false,
                        };
                        self.last = self.urbp.second_action(moved, obs.entry_port);
                    }
                    return self.last;
                }
                HarvestStage::Execution { rounds_left: 0, .. } => self.next_epoch(),
                HarvestStage::Execution {
                    rounds_left,
                    exhausted,
                } => {
                    let action = if exhausted {
                        None
                    } else {
                        self.walk_action(obs.degree)
                    };
                    self.stage = HarvestStage::Execution {
                        rounds_left: rounds_left - 1,
                        exhausted: action.is_none(),
                    };
                    self.last = action.unwrap_or(Action::Idle);
                    return self.last;
                }
            }
        }
    }

    fn take_note(&mut self) -> Option<String> {
        self.note.take()
    }
}

impl Harvest {
    /// Stores the bit of a bit production whose second attempt just ended.
    fn settle(&mut self, obs: &Observation) {
        if let HarvestStage::Preparation {
            calls_left,
            second: false,
        } = self.stage
        {
            if self.urbp.first.is_some() {
                let moved = matches!(outcome(self.last, obs), Outcome::Moved { .. });
                if let Some(bit) = self.urbp.finish(moved) {
                    self.bits.push_back(bit);
                    self.harvested += 1;
                }
                self.urbp.first = None;
                self.stage = HarvestStage::Preparation {
                    calls_left: calls_left - 1,
                    second: false,
                };
            }
        }
    }
}

impl Hash for Harvest {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.label.hash(state);
        self.q.hash(state);
        self.epoch.hash(state);
        self.stage.hash(state);
        self.urbp.hash(state);
        self.bits.hash(state);
        self.last.hash(state);
    }
}

impl fmt::Debug for Harvest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Harvest")
            .field("label", &self.label)
            .field("epoch", &self.epoch)
            .field("stage", &self.stage)
            .field("bits", &self.bits.len())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn urbp_outcomes() {
        assert_eq!(urbp_bit(true, false), Some(1));
        assert_eq!(urbp_bit(false, true), Some(0));
        assert_eq!(urbp_bit(true, true), None);
        assert_eq!(urbp_bit(false, false), None);
    }

    #[test]
    fn log_sizes() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(5), 3);
    }

    const SQUARE: WalkLength = WalkLength { coef: 1, exp: 2 };

    #[test]
    fn epoch_two_preparation() {
        assert_eq!(Harvest::preparation_calls(SQUARE, 2), 8);
        assert_eq!(Harvest::preparation_calls(SQUARE, 1), 0);
    }

    #[test]
    fn walk_reads_bits_msb_first() {
        let mut h = Harvest::new(1, SQUARE).unwrap();
        h.bits.extend([1, 1, 0, 1]);
        assert_eq!(h.walk_action(3), Some(Action::Idle));
        h.bits.extend([1]);
        assert_eq!(h.walk_action(4), Some(Action::Move(1)));
        assert_eq!(h.walk_action(1), Some(Action::Move(0)));
        assert_eq!(h.walk_action(3), None);
    }

    #[test]
    fn epoch_one_walks_only_on_degree_one() {
        let mut p = Harvest::new(1, SQUARE).unwrap();
        let obs = Observation::at_start(1);
        assert_eq!(Program::decide(&mut p, &obs), Action::Move(0));
        assert_eq!(p.epoch(), 1);
        // epoch 2 starts with 8 bit productions of 2 rounds each
        let moved = Observation {
            entry_port: Some(0),
            ..obs
        };
        let mut rounds = 0;
        while p.epoch() < 2 || matches!(p.stage, HarvestStage::Preparation { .. }) {
            Program::decide(&mut p, &moved);
            rounds += 1;
        }
        assert_eq!(rounds, 16 + 1);
        assert_eq!(p.harvested(), 0);
    }
}
