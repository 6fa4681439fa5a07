//! Rendezvous under bounded adversarial faults with unknown bound: phases of
//! time slices, one active slice per phase selected by the label, in which
//! the agent explores three times with doubling estimates.

use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::graph::Port;
use crate::program::{outcome, Action, Observation, Outcome, Program};
use crate::uxs::{exit_port, UxsLibrary};

/// Explorations per active stage.
pub const EXPLORATIONS_PER_STAGE: u64 = 3;

/// Highest phase whose length `2^(2i+4)` fits in a `u64`.
pub const MAX_PHASE: u32 = 29;

/// Timing of phase `i` together with the current estimates `u` (sequence
/// length) and `c` (fault bound). Estimates start at `u = 1, c = 2^q` in
/// the first active phase `q = ⌈log2(λ+1)⌉` and exactly one of them doubles
/// after every active phase.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct PhaseSchedule {
    pub i: u32,
    pub q: u32,
    pub u: u64,
    pub c: u64,
}

impl PhaseSchedule {
    pub fn new(label: u64) -> Result<Self> {
        if label == 0 {
            return Err(invalid("label must be positive"));
        }
        let q = first_active_phase(label);
        if q > MAX_PHASE {
            return Err(invalid(format!(
                "label {label} is never active within phase {MAX_PHASE}"
            )));
        }
        Ok(Self {
            i: 0,
            q,
            u: 1,
            c: 1 << q,
        })
    }

    pub fn stages(&self) -> u64 {
        1 << self.i
    }

    pub fn stage_len(&self) -> u64 {
        1 << (self.i + 4)
    }

    pub fn busy(&self) -> u64 {
        EXPLORATIONS_PER_STAGE << self.i
    }

    pub fn waiting(&self) -> u64 {
        13 << self.i
    }

    pub fn phase_len(&self) -> u64 {
        1 << (2 * self.i + 4)
    }

    /// Rounds of one exploration call.
    pub fn budget(&self) -> u64 {
        1 << self.i
    }

    pub fn is_active(&self) -> bool {
        self.i >= self.q
    }

    /// Rounds from wake-up to the start of phase `i`.
    pub fn phase_start(i: u32) -> u64 {
        (0..i).map(|k| 1u64 << (2 * k + 4)).sum()
    }

    /// Moves to the next phase; `success` reports whether all explorations
    /// of the active stage just finished succeeded.
    pub fn advance(&mut self, success: bool) {
        if self.is_active() {
            if success {
                self.u *= 2;
            } else {
                self.c *= 2;
            }
        }
        self.i += 1;
        assert!(self.i <= MAX_PHASE, "phase counter overflow");
        self.check();
    }

    /// Panics if the schedule arithmetic is inconsistent.
    pub fn check(&self) {
        assert_eq!(self.stage_len(), self.busy() + self.waiting());
        assert_eq!(self.phase_len(), self.stages() * self.stage_len());
        if self.is_active() {
            assert_eq!(self.u * self.c, self.budget(), "u * c must equal 2^i");
        }
    }
}

/// `⌈log2(λ+1)⌉`: the first phase with a stage indexed `λ`.
pub fn first_active_phase(label: u64) -> u32 {
    64 - label.leading_zeros()
}

/// Position inside an active exploration call.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
struct Slot {
    step: u64,
    attempt: u64,
}

#[derive(Clone)]
pub struct GraphRvBf {
    label: u64,
    library: Arc<UxsLibrary>,
    sched: PhaseSchedule,
    terms: Arc<Vec<u32>>,
    stage: u64,
    t: u64,
    stage_ok: bool,
    exploration_ok: bool,
    step_moved: bool,
    /// Entry port inside the current exploration; `None` at its start.
    entry: Option<Port>,
    /// Slot of the previous decision, if it was an attempt.
    last_slot: Option<Slot>,
    last: Action,
    explorations: u64,
    failed_explorations: u64,
    note: Option<String>,
}

impl GraphRvBf {
    pub fn new(label: u64, library: Arc<UxsLibrary>) -> Result<Self> {
        Ok(Self {
            label,
            library,
            sched: PhaseSchedule::new(label)?,
            terms: Arc::new(Vec::new()),
            stage: 0,
            t: 0,
            stage_ok: true,
            exploration_ok: true,
            step_moved: false,
            entry: None,
            last_slot: None,
            last: Action::Idle,
            explorations: 0,
            failed_explorations: 0,
            note: None,
        })
    }

    pub fn schedule(&self) -> PhaseSchedule {
        self.sched
    }

    /// Exploration calls started so far.
    pub fn explorations(&self) -> u64 {
        self.explorations
    }

    pub fn failed_explorations(&self) -> u64 {
        self.failed_explorations
    }

    fn in_active_stage(&self) -> bool {
        self.sched.is_active() && self.stage == self.label
    }

    fn absorb(&mut self, out: Outcome) {
        if let Outcome::Moved { entry } = out {
            self.entry = Some(entry);
            self.step_moved = true;
        }
        if let Some(slot) = self.last_slot.take() {
            if slot.attempt + 1 == self.sched.c && !self.step_moved && self.exploration_ok {
                self.exploration_ok = false;
                self.stage_ok = false;
                self.failed_explorations += 1;
                self.note = Some(format!("exploration failed at step {}", slot.step));
            }
        }
    }

    fn busy_action(&mut self, degree: usize) -> Action {
        let e = self.sched.budget();
        let offset = self.t % e;
        let slot = Slot {
            step: offset / self.sched.c,
            attempt: offset % self.sched.c,
        };
        if self.t == 0 {
            self.stage_ok = true;
            let (terms, note) = self.library.sequence_of_length(self.sched.u as usize);
            self.terms = Arc::new(terms);
            self.note = Some(format!(
                "phase {} u={} c={}; {note}",
                self.sched.i, self.sched.u, self.sched.c
            ));
        }
        if offset == 0 {
            self.exploration_ok = true;
            self.entry = None;
            self.explorations += 1;
        }
        if slot.attempt == 0 {
            self.step_moved = false;
        }
        if !self.exploration_ok || self.step_moved || degree == 0 {
            return Action::Idle;
        }
        self.last_slot = Some(slot);
        let from = self.entry.unwrap_or(0);
        Action::Move(exit_port(from, degree, self.terms[slot.step as usize]))
    }

    fn tick(&mut self) {
        self.t += 1;
        if self.t < self.sched.stage_len() {
            return;
        }
        self.t = 0;
        self.stage += 1;
        if self.stage < self.sched.stages() {
            return;
        }
        self.stage = 0;
        let success = self.stage_ok;
        self.sched.advance(success);
    }
}

impl Program for GraphRvBf {
    fn decide(&mut self, obs: &Observation) -> Action {
        let out = outcome(self.last, obs);
        self.absorb(out);
        let action = if self.in_active_stage() && self.t < self.sched.busy() {
            self.busy_action(obs.degree)
        } else {
            Action::Idle
        };
        self.tick();
        self.last = action;
        action
    }

    fn take_note(&mut self) -> Option<String> {
        self.note.take()
    }
}

impl Hash for GraphRvBf {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.label.hash(state);
        self.sched.hash(state);
        self.stage.hash(state);
        self.t.hash(state);
        self.stage_ok.hash(state);
        self.exploration_ok.hash(state);
        self.step_moved.hash(state);
        self.entry.hash(state);
        self.last_slot.hash(state);
        self.last.hash(state);
    }
}

impl std::fmt::Debug for GraphRvBf {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GraphRvBf")
            .field("label", &self.label)
            .field("phase", &self.sched.i)
            .field("stage", &self.stage)
            .field("t", &self.t)
            .field("u", &self.sched.u)
            .field("c", &self.sched.c)
            .finish()
    }
}

/// One exploration call in isolation: `terms.len()` steps of `c` rounds,
/// each attempting its move until it succeeds. `blocked(round)` says whether
/// the move attempted in that round is blocked. Returns the success flag,
/// the exit ports taken and the number of rounds used, which is always
/// `terms.len() * c`.
pub fn exploration(
    terms: &[u32],
    c: u64,
    mut degree_after: impl FnMut(Port) -> (usize, Port),
    start_degree: usize,
    mut blocked: impl FnMut(u64) -> bool,
) -> (bool, Vec<Port>, u64) {
    let mut rounds = 0;
    let mut ports = Vec::new();
    let mut degree = start_degree;
    let mut entry = 0;
    let mut success = true;
    for &x in terms {
        let mut moved = false;
        for _ in 0..c {
            let q = exit_port(entry, degree, x);
            let r = rounds;
            rounds += 1;
            if !blocked(r) {
                (degree, entry) = degree_after(q);
                ports.push(q);
                moved = true;
                break;
            }
        }
        if !moved {
            success = false;
            break;
        }
        rounds = rounds.div_ceil(c) * c;
    }
    (success, ports, terms.len() as u64 * c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_arithmetic() {
        let mut s = PhaseSchedule::new(1).unwrap();
        assert_eq!(s.q, 1);
        s.advance(false);
        assert_eq!((s.i, s.u, s.c), (1, 1, 2));
        s.i = 3;
        s.u = 2;
        s.c = 4;
        assert_eq!(s.phase_len(), 1024);
        assert_eq!(s.stages() * s.stage_len(), 8 * 128);
        s.check();
        assert_eq!(PhaseSchedule::phase_start(2), 16 + 64);
    }

    #[test]
    fn first_active_phases() {
        assert_eq!(first_active_phase(1), 1);
        assert_eq!(first_active_phase(2), 2);
        assert_eq!(first_active_phase(3), 2);
        assert_eq!(first_active_phase(4), 3);
    }

    fn edge(_q: Port) -> (usize, Port) {
        (1, 0)
    }

    #[test]
    fn exploration_examples() {
        assert_eq!(exploration(&[1], 2, edge, 1, |_| false), (true, vec![0], 2));
        assert_eq!(exploration(&[1], 2, edge, 1, |_| true), (false, vec![], 2));
        // at most 3 consecutive blocked rounds
        let (ok, ports, rounds) =
            exploration(&[1, 1], 4, edge, 1, |r| r < 3 || (4..7).contains(&r));
        assert!(ok);
        assert_eq!(ports.len(), 2);
        assert_eq!(rounds, 8);
    }

    #[test]
    fn label_one_first_active_stage() {
        let mut p = GraphRvBf::new(1, Arc::new(UxsLibrary::shipped())).unwrap();
        let obs = Observation::at_start(1);
        // phase 0 (16 rounds) and stage 0 of phase 1 (32 rounds) are idle
        for _ in 0..48 {
            assert_eq!(Program::decide(&mut p, &obs), Action::Idle);
        }
        assert_eq!(p.schedule().i, 1);
        assert_eq!((p.schedule().u, p.schedule().c), (1, 2));
        let moved = Observation {
            entry_port: Some(0),
            ..obs
        };
        assert_eq!(Program::decide(&mut p, &obs), Action::Move(0));
        assert_eq!(Program::decide(&mut p, &moved), Action::Idle);
        assert_eq!(Program::decide(&mut p, &moved), Action::Move(0));
        assert_eq!(p.explorations(), 2);
    }
}
