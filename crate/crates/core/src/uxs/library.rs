//! Stored sequences: cache files and the sequences shipped with the crate.

use std::path::Path;

use super::{Uxs, Verification, EXHAUSTIVE_CAP};
use crate::error::{invalid, Error, Result};

/// Random graphs each shipped sequence above the exhaustive cap was checked on.
pub const SHIPPED_SAMPLE_TRIALS: usize = 20_000;

const SHIPPED: [&str; 7] = [
    include_str!("../../data/uxs_m1.txt"),
    include_str!("../../data/uxs_m2.txt"),
    include_str!("../../data/uxs_m3.txt"),
    include_str!("../../data/uxs_m4.txt"),
    include_str!("../../data/uxs_m5.txt"),
    include_str!("../../data/uxs_m6.txt"),
    include_str!("../../data/uxs_m7.txt"),
];

pub fn cache_file_name(m: usize) -> String {
    format!("uxs_m{m}.txt")
}

/// Parses a cache file body: one non-negative integer per line.
pub fn parse_cache(text: &str) -> Result<Vec<u32>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse().map_err(|_| Error::Parse {
                line: i + 1,
                message: format!("`{}` is not a non-negative integer", l.trim()),
            })
        })
        .collect()
}

pub fn read_cache(path: &Path) -> Result<Vec<u32>> {
    parse_cache(&std::fs::read_to_string(path)?)
}

pub fn write_cache(path: &Path, terms: &[u32]) -> Result<()> {
    let mut body = String::with_capacity(terms.len() * 3);
    for t in terms {
        body.push_str(&t.to_string());
        body.push('\n');
    }
    std::fs::write(path, body)?;
    Ok(())
}

/// Sequences for size bounds `1..=max_size()`, with `P(m)` non-decreasing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UxsLibrary {
    seqs: Vec<Uxs>,
}

impl UxsLibrary {
    /// The sequences bundled with the crate, for sizes 1 through 7.
    pub fn shipped() -> Self {
        let seqs = SHIPPED
            .iter()
            .enumerate()
            .map(|(i, text)| {
                let m = i + 1;
                let verification = if m <= EXHAUSTIVE_CAP {
                    Verification::Exhaustive
                } else {
                    Verification::Sampled {
                        trials: SHIPPED_SAMPLE_TRIALS,
                    }
                };
                Uxs::new(
                    parse_cache(text).expect("shipped data parses"),
                    m,
                    verification,
                )
            })
            .collect();
        Self::new(seqs).expect("shipped data is consistent")
    }

    /// Builds a library from sequences for sizes `1..=k` in order. Whenever a
    /// size has a longer sequence than some larger size, the larger size's
    /// sequence (which explores the smaller graphs too) replaces it.
    pub fn new(mut seqs: Vec<Uxs>) -> Result<Self> {
        if seqs.is_empty() {
            return Err(invalid("library needs at least one sequence"));
        }
        for (i, s) in seqs.iter().enumerate() {
            if s.size_bound != i + 1 {
                return Err(invalid(format!(
                    "sequence {i} has size bound {}, expected {}",
                    s.size_bound,
                    i + 1
                )));
            }
        }
        for i in (0..seqs.len() - 1).rev() {
            if seqs[i].len() > seqs[i + 1].len() {
                let mut larger = seqs[i + 1].clone();
                larger.size_bound = i + 1;
                seqs[i] = larger;
            }
        }
        Ok(Self { seqs })
    }

    /// Loads `uxs_m1.txt`, `uxs_m2.txt`, … from `dir` up to the first missing file.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let mut seqs = Vec::new();
        loop {
            let m = seqs.len() + 1;
            let path = dir.join(cache_file_name(m));
            if !path.exists() {
                break;
            }
            seqs.push(Uxs::new(read_cache(&path)?, m, Verification::Unverified));
        }
        Self::new(seqs)
    }

    pub fn max_size(&self) -> usize {
        self.seqs.len()
    }

    pub fn get(&self, m: usize) -> Option<&Uxs> {
        m.checked_sub(1).and_then(|i| self.seqs.get(i))
    }

    /// `P(m)`, the forward-walk length for size bound `m`.
    pub fn p(&self, m: usize) -> Option<usize> {
        self.get(m).map(Uxs::len)
    }

    /// The sequence for `m`, or the largest one when `m` exceeds the library.
    pub fn for_size(&self, m: usize) -> &Uxs {
        self.get(m.max(1))
            .unwrap_or_else(|| self.seqs.last().expect("library is non-empty"))
    }

    pub fn largest(&self) -> &Uxs {
        self.seqs.last().expect("library is non-empty")
    }

    /// A sequence of exactly `u` terms: the longest stored sequence that fits,
    /// padded by cycling through the largest stored sequence. Returns the
    /// terms and a short description of how they were assembled.
    pub fn sequence_of_length(&self, u: usize) -> (Vec<u32>, String) {
        let base = self
            .seqs
            .iter()
            .rev()
            .find(|s| s.len() <= u)
            .expect("size-1 sequence is empty");
        let mut terms = base.terms.clone();
        let pad = u - terms.len();
        let filler = &self.largest().terms;
        if pad > 0 && filler.is_empty() {
            terms.resize(u, 1);
        } else {
            terms.extend(filler.iter().cycle().take(pad));
        }
        let note = format!(
            "uxs u={u}: m={} prefix ({}) + {pad} padding",
            base.size_bound,
            base.len()
        );
        (terms, note)
    }
}
