//! Repeated seeded runs and parameter sweeps.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::Scenario;
use crate::error::Result;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub met: bool,
    pub cost: u64,
    /// Rounds simulated, equal to the meeting round when the agents met.
    pub rounds: u64,
}

/// Statistics over a batch of trials. Cost and round statistics cover all
/// trials, met or not.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub trials: usize,
    pub met: usize,
    pub met_rate: f64,
    pub cost_min: u64,
    pub cost_med: u64,
    pub cost_p95: u64,
    pub cost_max: u64,
    pub rounds_med: u64,
    /// Mean meeting round over the trials that met.
    pub mean_rounds_to_meet: Option<f64>,
}

/// Nearest-rank quantile of sorted data.
pub fn quantile(sorted: &[u64], q: f64) -> u64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

impl Summary {
    pub fn from_records(records: &[TrialRecord]) -> Self {
        let mut costs: Vec<u64> = records.iter().map(|r| r.cost).collect();
        let mut rounds: Vec<u64> = records.iter().map(|r| r.rounds).collect();
        costs.sort_unstable();
        rounds.sort_unstable();
        let met: Vec<&TrialRecord> = records.iter().filter(|r| r.met).collect();
        let mean_rounds_to_meet = (!met.is_empty())
            .then(|| met.iter().map(|r| r.rounds as f64).sum::<f64>() / met.len() as f64);
        Self {
            trials: records.len(),
            met: met.len(),
            met_rate: met.len() as f64 / records.len() as f64,
            cost_min: costs[0],
            cost_med: quantile(&costs, 0.5),
            cost_p95: quantile(&costs, 0.95),
            cost_max: *costs.last().unwrap(),
            rounds_med: quantile(&rounds, 0.5),
            mean_rounds_to_meet,
        }
    }

    pub const CSV_COLUMNS: &'static str =
        "trials,met_rate,cost_min,cost_med,cost_p95,cost_max,rounds_med";

    pub fn csv_fields(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.trials,
            self.met_rate,
            self.cost_min,
            self.cost_med,
            self.cost_p95,
            self.cost_max,
            self.rounds_med
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MonteCarlo {
    pub summary: Summary,
    pub records: Vec<TrialRecord>,
}

/// Runs `trials` scenarios built from seeds `seed_base, seed_base+1, …` in
/// parallel. The result does not depend on scheduling.
pub fn monte_carlo<F>(trials: usize, seed_base: u64, build: F) -> Result<MonteCarlo>
where
    F: Fn(u64) -> Result<Scenario> + Sync,
{
    assert!(trials >= 1, "at least one trial");
    let records = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let seed = seed_base.wrapping_add(i);
            let r = build(seed)?.run()?;
            Ok(TrialRecord {
                seed,
                met: r.met,
                cost: r.cost,
                rounds: r.rounds,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MonteCarlo {
        summary: Summary::from_records(&records),
        records,
    })
}

pub type ScenarioBuilder = Arc<dyn Fn(u64) -> Result<Scenario> + Send + Sync>;

/// One grid point of a sweep.
#[derive(Clone)]
pub struct SweepCell {
    pub params: Vec<(String, String)>,
    pub build: ScenarioBuilder,
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub params: Vec<(String, String)>,
    pub result: std::result::Result<Summary, String>,
}

/// Monte-Carlo summary per cell. A failing cell is recorded and the sweep
/// carries on.
pub fn sweep(cells: &[SweepCell], trials: usize, seed_base: u64) -> Vec<SweepOutcome> {
    cells
        .iter()
        .map(|cell| SweepOutcome {
            params: cell.params.clone(),
            result: monte_carlo(trials, seed_base, |s| (cell.build)(s))
                .map(|mc| mc.summary)
                .map_err(|e| e.to_string()),
        })
        .collect()
}

/// CSV with the cell parameters first. Failed cells have zero trials and
/// empty statistics.
/// Quotes a CSV field holding a comma, quote or line break.
fn csv_field(v: &str) -> String {
    if v.contains([',', '"', '\n']) {
        format!("\"{}\"", v.replace('"', "\"\""))
    } else {
        v.to_string()
    }
}

pub fn sweep_csv(outcomes: &[SweepOutcome]) -> String {
    let mut out = String::new();
    let names: Vec<&str> = outcomes
        .first()
        .map(|o| o.params.iter().map(|(k, _)| k.as_str()).collect())
        .unwrap_or_default();
    for n in &names {
        write!(out, "{},", csv_field(n)).unwrap();
    }
    writeln!(out, "{}", Summary::CSV_COLUMNS).unwrap();
    for o in outcomes {
        for (_, v) in &o.params {
            write!(out, "{},", csv_field(v)).unwrap();
        }
        match &o.result {
            Ok(s) => writeln!(out, "{}", s.csv_fields()).unwrap(),
            Err(_) => writeln!(out, "0,,,,,,").unwrap(),
        }
    }
    out
}
