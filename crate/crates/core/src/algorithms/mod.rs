//! Rendezvous programs and their building blocks.

mod ac;
mod bf;
mod dance;
mod harvest;
mod known_bound;
mod probes;
mod rv_rf;
mod unbounded;

pub use ac::AcWrapper;
pub use bf::{
    exploration, first_active_phase, GraphRvBf, PhaseSchedule, EXPLORATIONS_PER_STAGE, MAX_PHASE,
};
pub use dance::{
    dance_script, modified_label, DanceScript, EdgeStep, ModifiedLabel, DANCE_CLOSING_CROSSINGS,
    DANCE_OPENING_IDLE,
};
pub use harvest::{ceil_log2, urbp_bit, Harvest, UrbpProgram, WalkLength};
pub use known_bound::KnownBound;
pub use probes::{AlwaysAttack, FiniteAttack, Scripted, Stay};
pub use rv_rf::{RvRf, RvRfPhase, CORRECTION_CROSSINGS, CORRECTION_IDLE};
pub use unbounded::{OrientedRingProgram, TreeRvUf};
