use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::flat::{self, FlatGraph};
use super::{EXHAUSTIVE_CAP, SAMPLED_CAP};
use crate::error::{invalid, Error, Result};
use crate::graph::{
    connected_graphs_up_to, random_connected_graph, EnumerationLimits, Labeling, NodeId, PortGraph,
};

/// Failures kept verbatim in a report; the rest are only counted.
const KEPT_FAILURES: usize = 32;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    /// Every connected graph with at most `m` nodes under every port labeling.
    Exhaustive,
    /// `trials` random connected graphs with random labelings, sizes uniform in `2..=m`.
    Sampled { trials: usize, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct UncoveredInstance {
    pub graph: PortGraph,
    pub start: NodeId,
    pub uncovered_edges: usize,
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub size_bound: usize,
    pub mode: VerifyMode,
    pub graphs: usize,
    /// Graph and start-node pairs checked.
    pub instances: usize,
    pub failure_count: usize,
    /// The first few failing instances.
    pub failures: Vec<UncoveredInstance>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }
}

/// Checks that `terms` crosses every edge of every graph in the corpus
/// selected by `mode`, from every start node.
pub fn verify_uxs(terms: &[u32], m: usize, mode: VerifyMode) -> Result<VerificationReport> {
    let graphs = corpus(m, mode)?;
    let failures: Vec<UncoveredInstance> = graphs
        .par_iter()
        .flat_map_iter(|g| uncovered(g, terms))
        .collect();
    let instances = graphs.iter().map(PortGraph::node_count).sum();
    let failure_count = failures.len();
    Ok(VerificationReport {
        size_bound: m,
        mode,
        graphs: graphs.len(),
        instances,
        failure_count,
        failures: failures.into_iter().take(KEPT_FAILURES).collect(),
    })
}

pub(crate) fn corpus(m: usize, mode: VerifyMode) -> Result<Vec<PortGraph>> {
    if m == 0 {
        return Err(invalid("size bound must be positive"));
    }
    match mode {
        VerifyMode::Exhaustive => exhaustive_corpus(m),
        VerifyMode::Sampled { trials, seed } => {
            if m > SAMPLED_CAP {
                return Err(Error::ResourceLimit(format!(
                    "sampled verification capped at m={SAMPLED_CAP}, asked for {m}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..trials)
                .filter_map(|_| sample_graph(m, &mut rng))
                .collect())
        }
    }
}

pub(crate) fn exhaustive_corpus(m: usize) -> Result<Vec<PortGraph>> {
    if m > EXHAUSTIVE_CAP {
        return Err(Error::ResourceLimit(format!(
            "exhaustive verification capped at m={EXHAUSTIVE_CAP}, asked for {m}"
        )));
    }
    let limits = EnumerationLimits {
        all_labelings_cap: EXHAUSTIVE_CAP,
        ..EnumerationLimits::default()
    };
    connected_graphs_up_to(m, Labeling::All, limits)
}

/// A random connected graph with `2..=m` nodes, or `None` when `m < 2`.
pub(crate) fn sample_graph<R: Rng>(m: usize, rng: &mut R) -> Option<PortGraph> {
    if m < 2 {
        return None;
    }
    let n = rng.gen_range(2..=m);
    let density = rng.gen::<f64>();
    Some(random_connected_graph(n, density, rng))
}

fn uncovered(g: &PortGraph, terms: &[u32]) -> Vec<UncoveredInstance> {
    let flat = FlatGraph::new(g);
    g.nodes()
        .filter_map(|v| {
            let s = flat::run(&flat, v, terms);
            (!flat.done(s)).then(|| UncoveredInstance {
                graph: g.clone(),
                start: v,
                uncovered_edges: (flat.full & !s.covered).count_ones() as usize,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sequence_fails_on_an_edge() {
        let r = verify_uxs(&[], 2, VerifyMode::Exhaustive).unwrap();
        assert!(!r.passed());
        assert_eq!(r.failure_count, 2);
    }

    #[test]
    fn single_term_explores_two_nodes() {
        assert!(verify_uxs(&[1], 2, VerifyMode::Exhaustive)
            .unwrap()
            .passed());
    }

    #[test]
    fn size_one_is_vacuous() {
        assert!(verify_uxs(&[], 1, VerifyMode::Exhaustive).unwrap().passed());
        assert!(verify_uxs(&[3, 1], 1, VerifyMode::Exhaustive)
            .unwrap()
            .passed());
    }

    #[test]
    fn exhaustive_cap() {
        assert!(matches!(
            verify_uxs(&[1], 99, VerifyMode::Exhaustive),
            Err(Error::ResourceLimit(_))
        ));
    }
}
