//! Label encoding and the edge dance built on it.

use std::ops::Range;

use crate::error::{invalid, Result};

/// Bits of a label made prefix-free: every binary digit `0` becomes
/// `0011`, every `1` becomes `1100`, and `10` is appended.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModifiedLabel {
    bits: Vec<u8>,
}

impl ModifiedLabel {
    pub fn new(label: u64) -> Result<Self> {
        if label == 0 {
            return Err(invalid("label must be positive"));
        }
        let width = 64 - label.leading_zeros();
        let mut bits = Vec::with_capacity(4 * width as usize + 2);
        for i in (0..width).rev() {
            if label >> i & 1 == 1 {
                bits.extend([1, 1, 0, 0]);
            } else {
                bits.extend([0, 0, 1, 1]);
            }
        }
        bits.extend([1, 0]);
        Ok(Self { bits })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_prefix_of(&self, other: &ModifiedLabel) -> bool {
        other.bits.starts_with(&self.bits)
    }
}

pub fn modified_label(label: u64) -> Result<ModifiedLabel> {
    ModifiedLabel::new(label)
}

/// One round of the dance, relative to the edge being danced on.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum EdgeStep {
    Idle,
    /// Cross to the other endpoint of the edge.
    Cross,
}

/// Rounds of the dance on edge `{x, y}` for an agent starting at `y`:
/// 10 idle rounds; then per label bit two idle rounds for `0` or a visit to
/// `x` and back for `1`; then 12 crossings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DanceScript {
    pub steps: Vec<EdgeStep>,
    /// Rounds of the label-encoding part.
    pub bit_rounds: Range<usize>,
}

pub const DANCE_OPENING_IDLE: usize = 10;
pub const DANCE_CLOSING_CROSSINGS: usize = 12;

pub fn dance_script(label: &ModifiedLabel) -> DanceScript {
    let mut steps = vec![EdgeStep::Idle; DANCE_OPENING_IDLE];
    for &b in label.bits() {
        let step = if b == 1 {
            EdgeStep::Cross
        } else {
            EdgeStep::Idle
        };
        steps.extend([step, step]);
    }
    let bit_rounds = DANCE_OPENING_IDLE..steps.len();
    steps.extend([EdgeStep::Cross; DANCE_CLOSING_CROSSINGS]);
    DanceScript { steps, bit_rounds }
}

impl DanceScript {
    pub fn rounds(&self) -> usize {
        self.steps.len()
    }

    pub fn crossings(&self) -> usize {
        self.steps.iter().filter(|&&s| s == EdgeStep::Cross).count()
    }
}
