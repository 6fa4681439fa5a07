//! Greedy randomized search for exploration sequences.
//!
//! Sequences are built as a ladder: the sequence for size `k` extends the one
//! for `k - 1`, so every rung also explores all smaller graphs and lengths
//! grow with `k`. Each new term is the candidate that crosses the most
//! not-yet-crossed edges summed over all unfinished (graph, start) instances;
//! when no single term gains, a two-term lookahead decides, and a random term
//! is drawn when that also fails. Bounds above the exhaustive cap are trained
//! on random graphs and repaired until a fresh random batch passes.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::flat::{self, FlatGraph, WalkState};
use super::library::{cache_file_name, read_cache, write_cache};
use super::verify::{corpus, exhaustive_corpus, verify_uxs, VerifyMode};
use super::{lcm_up_to, Uxs, Verification, EXHAUSTIVE_CAP, SAMPLED_CAP};
use crate::error::{invalid, Error, Result};
use crate::graph::{NodeId, PortGraph};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// Simulated walk steps the search may spend, summed over all instances.
    pub budget: u64,
    pub seed: u64,
    /// Independent greedy runs per rung; the shortest result is kept.
    pub restarts: usize,
    /// Random graphs per training sample and per fresh verification batch,
    /// for size bounds above the exhaustive cap.
    pub sample_trials: usize,
    /// Clean fresh batches required before a sampled rung is accepted.
    pub clean_batches: usize,
    pub max_repairs: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            budget: 50_000_000_000,
            seed: 0x05ee_d0f0_u64,
            restarts: 4,
            sample_trials: 10_000,
            clean_batches: 2,
            max_repairs: 64,
        }
    }
}

/// Searches an exhaustively verified sequence for size bound `m`.
pub fn find_uxs(m: usize, budget: u64) -> Result<Uxs> {
    if m > EXHAUSTIVE_CAP {
        return Err(Error::ResourceLimit(format!(
            "exhaustive search capped at m={EXHAUSTIVE_CAP}, asked for {m}"
        )));
    }
    let config = SearchConfig {
        budget,
        ..SearchConfig::default()
    };
    Ok(search_uxs_ladder(m, &config)?
        .pop()
        .expect("ladder is non-empty"))
}

/// Returns the cached sequence for `m` from `dir` if it still verifies,
/// otherwise searches and writes every rung of the ladder to `dir`.
pub fn find_uxs_cached(m: usize, config: &SearchConfig, dir: &Path) -> Result<Uxs> {
    let path = dir.join(cache_file_name(m));
    if path.exists() {
        let terms = read_cache(&path)?;
        let (mode, verification) = mode_for(m, config);
        if verify_uxs(&terms, m, mode)?.passed() {
            return Ok(Uxs::new(terms, m, verification));
        }
    }
    let ladder = search_uxs_ladder(m, config)?;
    std::fs::create_dir_all(dir)?;
    for rung in &ladder {
        write_cache(&dir.join(cache_file_name(rung.size_bound)), &rung.terms)?;
    }
    Ok(ladder.into_iter().last().expect("ladder is non-empty"))
}

/// Sequences for every size bound `1..=m`, each a prefix of the next.
pub fn search_uxs_ladder(m: usize, config: &SearchConfig) -> Result<Vec<Uxs>> {
    if m == 0 {
        return Err(invalid("size bound must be positive"));
    }
    if m > SAMPLED_CAP {
        return Err(Error::ResourceLimit(format!(
            "search capped at m={SAMPLED_CAP}, asked for {m}"
        )));
    }
    if config.budget == 0 {
        return Err(invalid("search budget must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut budget = config.budget;
    let mut out = vec![Uxs::new(Vec::new(), 1, Verification::Exhaustive)];
    for k in 2..=m {
        let prefix = out.last().unwrap().terms.clone();
        let rung = if k <= EXHAUSTIVE_CAP {
            let instances = instances_of(&exhaustive_corpus(k)?);
            let terms = best_of_restarts(&prefix, &instances, k, config, &mut rng, &mut budget)?;
            Uxs::new(terms, k, Verification::Exhaustive)
        } else {
            sampled_rung(&prefix, k, config, &mut rng, &mut budget)?
        };
        out.push(rung);
    }
    Ok(out)
}

fn mode_for(m: usize, config: &SearchConfig) -> (VerifyMode, Verification) {
    if m <= EXHAUSTIVE_CAP {
        (VerifyMode::Exhaustive, Verification::Exhaustive)
    } else {
        (
            VerifyMode::Sampled {
                trials: config.sample_trials,
                seed: config.seed ^ 0x9e37_79b9,
            },
            Verification::Sampled {
                trials: config.sample_trials,
            },
        )
    }
}

fn sampled_rung(
    prefix: &[u32],
    k: usize,
    config: &SearchConfig,
    rng: &mut ChaCha8Rng,
    budget: &mut u64,
) -> Result<Uxs> {
    let sample = |rng: &mut ChaCha8Rng| {
        corpus(
            k,
            VerifyMode::Sampled {
                trials: config.sample_trials,
                seed: rng.gen(),
            },
        )
    };
    let training = instances_of(&sample(rng)?);
    let mut terms = best_of_restarts(prefix, &training, k, config, rng, budget)?;
    let mut clean = 0;
    for _ in 0..config.max_repairs {
        let batch = instances_of(&sample(rng)?);
        let failing: Vec<Instance> = batch
            .into_iter()
            .filter(|inst| !inst.graph.done(flat::run(&inst.graph, inst.start, &terms)))
            .collect();
        if failing.is_empty() {
            clean += 1;
            if clean >= config.clean_batches {
                return Ok(Uxs::new(
                    terms,
                    k,
                    Verification::Sampled {
                        trials: config.sample_trials * clean,
                    },
                ));
            }
        } else {
            clean = 0;
            terms = greedy_extend(&terms, &failing, k, rng, budget)?;
        }
    }
    Err(Error::SearchFailure(format!(
        "m={k}: fresh samples still uncovered after {} repairs",
        config.max_repairs
    )))
}

struct Instance {
    graph: std::sync::Arc<FlatGraph>,
    start: NodeId,
}

fn instances_of(graphs: &[PortGraph]) -> Vec<Instance> {
    graphs
        .iter()
        .flat_map(|g| {
            let flat = std::sync::Arc::new(FlatGraph::new(g));
            (0..flat.node_count()).map(move |v| Instance {
                graph: flat.clone(),
                start: NodeId::from(v),
            })
        })
        .collect()
}

fn best_of_restarts(
    prefix: &[u32],
    instances: &[Instance],
    k: usize,
    config: &SearchConfig,
    rng: &mut ChaCha8Rng,
    budget: &mut u64,
) -> Result<Vec<u32>> {
    let mut best: Option<Vec<u32>> = None;
    for _ in 0..config.restarts.max(1) {
        let terms = greedy_extend(prefix, instances, k, rng, budget)?;
        if best.as_ref().is_none_or(|b| terms.len() < b.len()) {
            best = Some(terms);
        }
    }
    Ok(best.unwrap())
}

fn candidates(k: usize) -> Vec<u32> {
    let top = (lcm_up_to(k - 1).saturating_sub(1)).max(1) as u32;
    (1..=top).chain(std::iter::once(0)).collect()
}

fn gain(g: &FlatGraph, s: WalkState, x: u32) -> u32 {
    (g.step(s, x).covered & !s.covered).count_ones()
}

fn greedy_extend(
    prefix: &[u32],
    instances: &[Instance],
    k: usize,
    rng: &mut ChaCha8Rng,
    budget: &mut u64,
) -> Result<Vec<u32>> {
    let cands = candidates(k);
    let mut terms = prefix.to_vec();
    let mut active: Vec<(&FlatGraph, WalkState)> = instances
        .iter()
        .map(|inst| (&*inst.graph, flat::run(&inst.graph, inst.start, prefix)))
        .filter(|(g, s)| !g.done(*s))
        .collect();
    while !active.is_empty() {
        charge(budget, (active.len() * cands.len()) as u64, k)?;
        let gains: Vec<u64> = cands
            .par_iter()
            .map(|&x| active.iter().map(|&(g, s)| gain(g, s, x) as u64).sum())
            .collect();
        let (best_i, &best_gain) = max_first(&gains);
        let x = if best_gain > 0 {
            cands[best_i]
        } else {
            charge(budget, (active.len() * cands.len() * cands.len()) as u64, k)?;
            let ahead: Vec<u64> = cands
                .par_iter()
                .map(|&x| {
                    cands
                        .iter()
                        .map(|&y| {
                            active
                                .iter()
                                .map(|&(g, s)| gain(g, g.step(s, x), y) as u64)
                                .sum::<u64>()
                        })
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let (i, &g) = max_first(&ahead);
            if g > 0 {
                cands[i]
            } else {
                *cands.choose(rng).unwrap()
            }
        };
        terms.push(x);
        for (g, s) in active.iter_mut() {
            *s = g.step(*s, x);
        }
        active.retain(|(g, s)| !g.done(*s));
    }
    Ok(terms)
}

fn max_first(values: &[u64]) -> (usize, &u64) {
    values
        .iter()
        .enumerate()
        .rev()
        .max_by_key(|&(_, v)| *v)
        .expect("non-empty candidate set")
}

fn charge(budget: &mut u64, cost: u64, k: usize) -> Result<()> {
    if cost > *budget {
        *budget = 0;
        return Err(Error::SearchFailure(format!(
            "search budget exhausted while building the m={k} sequence"
        )));
    }
    *budget -= cost;
    Ok(())
}
