//! Experiment config files.
//!
//! Sections in brackets hold `key = value` lines. `#` starts a comment.
//!
//! ```text
//! [graph]
//! kind = path            # path | ring | oriented-ring | homogeneous-ring | star | file
//! n = 5                  # node count; `file = g.txt` for kind = file
//!
//! [agents]
//! labels = 1, 2
//! starts = 0, 4
//! wakes = 0, 0           # optional
//!
//! [algorithm]            # both agents; [algorithm.1] overrides agent 1
//! name = rv-rf
//! wrap = 2               # optional: stretch to tolerate 2 consecutive faults
//!
//! [adversary]
//! kind = random          # none | random | max-delay | tough | scripted
//! p = 0.3
//!
//! [run]
//! horizon = 1000000
//! seed = 1
//! trials = 100
//!
//! [sweep]                # grid over `section.key`, values separated by `|`
//! adversary.p = 0.1 | 0.3 | 0.5
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use delayrv::adversary::{FaultModel, FaultSchedule, Release, DEFAULT_PATIENCE};
use delayrv::engine::{AgentSpec, RunConfig, Scenario, DEFAULT_HORIZON};
use delayrv::setup::{AdversarySpec, Algorithm};
use delayrv::uxs::UxsLibrary;
use delayrv::{NodeId, PortGraph};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_TRIALS: usize = 100;

const SECTIONS: &[&str] = &[
    "graph",
    "agents",
    "algorithm",
    "algorithm.1",
    "adversary",
    "run",
    "sweep",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: `{}`: {}", self.key, self.message),
            None => write!(f, "`{}`: {}", self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn error(line: Option<usize>, key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Clone, Debug)]
struct Value {
    text: String,
    line: Option<usize>,
}

/// Keys as written, before interpretation.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    values: BTreeMap<String, Value>,
    sweep: Vec<(String, Vec<String>, usize)>,
    dir: PathBuf,
}

impl RawConfig {
    pub fn parse(text: &str, dir: &Path) -> Result<Self, ConfigError> {
        let mut raw = RawConfig {
            dir: dir.to_path_buf(),
            ..Default::default()
        };
        let mut section: Option<String> = None;
        for (i, line) in text.lines().enumerate() {
            let n = Some(i + 1);
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(name) = body.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| error(n, body, "unterminated section header"))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(error(n, name, "unknown section"));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| error(n, body, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            let sec = section
                .as_deref()
                .ok_or_else(|| error(n, key, "key outside any section"))?;
            if key.is_empty() {
                return Err(error(n, sec, "empty key"));
            }
            if sec == "sweep" {
                let options: Vec<String> = value.split('|').map(|v| v.trim().to_string()).collect();
                if !key.contains('.') || options.iter().any(String::is_empty) {
                    return Err(error(n, key, "sweep entries are `section.key = a | b | …`"));
                }
                raw.sweep.push((key.to_string(), options, i + 1));
                continue;
            }
            let full = format!("{sec}.{key}");
            let prev = raw.values.insert(
                full.clone(),
                Value {
                    text: value.to_string(),
                    line: n,
                },
            );
            if prev.is_some() {
                return Err(error(n, &full, "duplicate key"));
            }
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| error(None, &path.display().to_string(), e.to_string()))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn set(&mut self, key: &str, value: String) {
        let line = self.values.get(key).and_then(|v| v.line);
        self.values
            .insert(key.to_string(), Value { text: value, line });
    }

    /// Every combination of the sweep values, first key varying slowest.
    pub fn sweep_grid(&self) -> Vec<Vec<(String, String)>> {
        let mut grid: Vec<Vec<(String, String)>> = vec![Vec::new()];
        for (key, options, _) in &self.sweep {
            grid = grid
                .into_iter()
                .flat_map(|cell| {
                    options.iter().map(move |o| {
                        let mut c = cell.clone();
                        c.push((key.clone(), o.clone()));
                        c
                    })
                })
                .collect();
        }
        grid
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.values.get(key)
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.get(key).and_then(|v| v.line)
    }

    fn require(&self, key: &str) -> Result<&str, ConfigError> {
        self.get(key)
            .map(|v| v.text.as_str())
            .ok_or_else(|| error(None, key, "missing"))
    }

    fn parse_as<T: std::str::FromStr>(
        &self,
        key: &str,
        what: &str,
    ) -> Result<Option<T>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .text
                .parse()
                .map(Some)
                .map_err(|_| error(v.line, key, format!("expected {what}, got `{}`", v.text))),
        }
    }

    fn list<T: std::str::FromStr>(
        &self,
        key: &str,
        what: &str,
    ) -> Result<Option<[T; 2]>, ConfigError> {
        let Some(v) = self.get(key) else {
            return Ok(None);
        };
        let items: Vec<&str> = v.text.split(',').map(str::trim).collect();
        let bad = || {
            error(
                v.line,
                key,
                format!("expected two {what} values separated by a comma"),
            )
        };
        let [a, b] = items[..] else {
            return Err(bad());
        };
        Ok(Some([
            a.parse().map_err(|_| bad())?,
            b.parse().map_err(|_| bad())?,
        ]))
    }
}

/// A fully interpreted config.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub graph: Arc<PortGraph>,
    pub agents: [AgentSpec; 2],
    pub algorithms: [Algorithm; 2],
    pub adversary: AdversarySpec,
    pub library: Arc<UxsLibrary>,
    pub horizon: u64,
    pub seed: u64,
    pub trials: usize,
    pub trace_out: Option<PathBuf>,
    pub dormant_meeting: bool,
    pub swap_order: bool,
    pub detect_crossings: bool,
}

impl ExperimentConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        let graph = Arc::new(graph(raw)?);

        let labels: [u64; 2] = raw
            .list("agents.labels", "integer")?
            .ok_or_else(|| error(None, "agents.labels", "missing"))?;
        let starts: [u32; 2] = raw
            .list("agents.starts", "node")?
            .ok_or_else(|| error(None, "agents.starts", "missing"))?;
        let wakes: [u64; 2] = raw.list("agents.wakes", "integer")?.unwrap_or([0, 0]);
        for (i, s) in starts.iter().enumerate() {
            if *s as usize >= graph.node_count() {
                return Err(error(
                    raw.line("agents.starts"),
                    "agents.starts",
                    format!(
                        "agent {i} starts at node {s}, graph has {} nodes",
                        graph.node_count()
                    ),
                ));
            }
        }
        let agents = [0, 1].map(|i| AgentSpec {
            label: labels[i],
            start: NodeId(starts[i]),
            wake: wakes[i],
        });

        let first = algorithm(raw, "algorithm")?;
        let second = if raw.values.keys().any(|k| k.starts_with("algorithm.1.")) {
            algorithm(raw, "algorithm.1")?
        } else {
            first.clone()
        };

        let seed = raw
            .parse_as("run.seed", "an integer")?
            .unwrap_or(DEFAULT_SEED);
        let trials = raw
            .parse_as("run.trials", "an integer")?
            .unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            return Err(error(
                raw.line("run.trials"),
                "run.trials",
                "must be positive",
            ));
        }
        let flag = |key: &str, default: bool| -> Result<bool, ConfigError> {
            Ok(raw.parse_as(key, "true or false")?.unwrap_or(default))
        };
        let library = match raw.get("run.uxs_dir") {
            None => UxsLibrary::shipped(),
            Some(v) => UxsLibrary::from_dir(&raw.dir.join(&v.text))
                .map_err(|e| error(v.line, "run.uxs_dir", e.to_string()))?,
        };

        Ok(Self {
            graph,
            agents,
            algorithms: [first, second],
            adversary: adversary(raw)?,
            library: Arc::new(library),
            horizon: raw
                .parse_as("run.horizon", "an integer")?
                .unwrap_or(DEFAULT_HORIZON),
            seed,
            trials,
            trace_out: raw.get("run.trace").map(|v| raw.dir.join(&v.text)),
            dormant_meeting: flag("run.dormant_meeting", true)?,
            swap_order: flag("run.swap_order", false)?,
            detect_crossings: flag("run.detect_crossings", true)?,
        })
    }

    pub fn run_config(&self) -> RunConfig {
        let mut cfg = RunConfig::new(Arc::clone(&self.graph), self.agents);
        cfg.horizon = self.horizon;
        cfg.dormant_meeting = self.dormant_meeting;
        cfg.swap_order = self.swap_order;
        cfg.detect_crossings = self.detect_crossings;
        cfg
    }

    pub fn programs(&self) -> delayrv::Result<[delayrv::BoxedProgram; 2]> {
        Ok([
            self.algorithms[0].build(self.agents[0].label, &self.library)?,
            self.algorithms[1].build(self.agents[1].label, &self.library)?,
        ])
    }

    pub fn scenario(&self, seed: u64, trace: bool) -> delayrv::Result<Scenario> {
        let mut config = self.run_config();
        config.trace = trace;
        Ok(Scenario {
            config,
            programs: self.programs()?,
            adversary: self.adversary.build(seed)?,
        })
    }
}

fn graph(raw: &RawConfig) -> Result<PortGraph, ConfigError> {
    let kind = raw.require("graph.kind")?;
    let line = raw.line("graph.kind");
    if kind == "file" {
        let v = raw
            .get("graph.file")
            .ok_or_else(|| error(None, "graph.file", "missing"))?;
        let path = raw.dir.join(&v.text);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| error(v.line, "graph.file", format!("{}: {e}", path.display())))?;
        return PortGraph::parse(&text).map_err(|e| error(v.line, "graph.file", e.to_string()));
    }
    let n: usize = raw
        .parse_as("graph.n", "a node count")?
        .ok_or_else(|| error(None, "graph.n", "missing"))?;
    let built = match kind {
        "path" => PortGraph::path(n),
        "ring" => PortGraph::ring(n),
        "oriented-ring" => PortGraph::oriented_ring(n),
        "homogeneous-ring" => PortGraph::homogeneous_ring(n),
        "star" => PortGraph::star(n.saturating_sub(1)),
        other => {
            return Err(error(
                line,
                "graph.kind",
                format!("unknown graph kind `{other}`"),
            ))
        }
    };
    built.map_err(|e| error(raw.line("graph.n"), "graph.n", e.to_string()))
}

fn algorithm(raw: &RawConfig, section: &str) -> Result<Algorithm, ConfigError> {
    let name_key = format!("{section}.name");
    let name = raw.require(&name_key)?;
    let prefix = format!("{section}.");
    let params: Vec<(&str, &str)> = raw
        .values
        .iter()
        .filter_map(|(k, v)| {
            let key = k.strip_prefix(&prefix)?;
            (!key.contains('.') && key != "name" && key != "wrap").then_some((key, v.text.as_str()))
        })
        .collect();
    let alg = Algorithm::from_parts(name, &params)
        .map_err(|e| error(raw.line(&name_key), &name_key, e.to_string()))?;
    let wrap_key = format!("{section}.wrap");
    Ok(match raw.parse_as::<u64>(&wrap_key, "a fault bound")? {
        None => alg,
        Some(c) => Algorithm::Wrapped {
            c,
            inner: Box::new(alg),
        },
    })
}

fn adversary(raw: &RawConfig) -> Result<AdversarySpec, ConfigError> {
    let Some(kind) = raw.get("adversary.kind") else {
        return Ok(AdversarySpec::None);
    };
    let need_p = || -> Result<f64, ConfigError> {
        raw.parse_as("adversary.p", "a probability")?
            .ok_or_else(|| error(None, "adversary.p", "missing"))
    };
    let need_c = || -> Result<u64, ConfigError> {
        raw.parse_as("adversary.c", "a fault bound")?
            .ok_or_else(|| error(None, "adversary.c", "missing"))
    };
    let spec = match kind.text.as_str() {
        "none" => AdversarySpec::None,
        "random" => AdversarySpec::Random { p: need_p()? },
        "max-delay" => AdversarySpec::MaxDelay { c: need_c()? },
        "tough" => AdversarySpec::Tough {
            patience: raw
                .parse_as("adversary.patience", "an integer")?
                .unwrap_or(DEFAULT_PATIENCE),
            release: match raw.get("adversary.release").map(|v| v.text.as_str()) {
                None | Some("synchronized") => Release::Synchronized,
                Some("independent") => Release::Independent,
                Some(other) => {
                    return Err(error(
                        raw.line("adversary.release"),
                        "adversary.release",
                        format!("expected synchronized or independent, got `{other}`"),
                    ))
                }
            },
        },
        "scripted" => {
            let v = raw
                .get("adversary.schedule")
                .ok_or_else(|| error(None, "adversary.schedule", "missing"))?;
            let path = raw.dir.join(&v.text);
            let text = std::fs::read_to_string(&path).map_err(|e| {
                error(
                    v.line,
                    "adversary.schedule",
                    format!("{}: {e}", path.display()),
                )
            })?;
            let schedule = FaultSchedule::parse(&text)
                .map_err(|e| error(v.line, "adversary.schedule", e.to_string()))?;
            let model = match raw.require("adversary.model")? {
                "bounded" => FaultModel::Bounded { c: need_c()? },
                "unbounded" => FaultModel::Unbounded,
                "random" => FaultModel::Random { p: need_p()? },
                other => {
                    return Err(error(
                        raw.line("adversary.model"),
                        "adversary.model",
                        format!("expected bounded, unbounded or random, got `{other}`"),
                    ))
                }
            };
            schedule
                .validate(&model)
                .map_err(|e| error(v.line, "adversary.schedule", e.to_string()))?;
            AdversarySpec::Scripted { schedule, model }
        }
        other => {
            return Err(error(
                kind.line,
                "adversary.kind",
                format!("unknown adversary `{other}`"),
            ))
        }
    };
    // Constructor checks such as p in [0, 1].
    spec.build(0)
        .map_err(|e| error(kind.line, "adversary.kind", e.to_string()))?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        ExperimentConfig::from_raw(&RawConfig::parse(text, Path::new("."))?)
    }

    const MINIMAL: &str = "[graph]\nkind = path\nn = 2\n[agents]\nlabels = 1, 2\nstarts = 0, 1\n[algorithm]\nname = rv-rf\n";

    #[test]
    fn minimal_config() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(c.graph.node_count(), 2);
        assert_eq!(c.algorithms[1], Algorithm::RvRf);
        assert_eq!(c.adversary, AdversarySpec::None);
        assert_eq!(c.seed, DEFAULT_SEED);
        assert_eq!(c.horizon, DEFAULT_HORIZON);
    }

    #[test]
    fn errors_name_key_and_line() {
        let err = parse("[graph]\nkind = path\nn = two\n").unwrap_err();
        assert_eq!((err.line, err.key.as_str()), (Some(3), "graph.n"));
        let err = parse(&format!("{MINIMAL}[adversary]\nkind = random\np = 1.5\n")).unwrap_err();
        assert_eq!(err.key, "adversary.kind");
        let err = parse("[graph]\nkind = path\n[nonsense]\n").unwrap_err();
        assert_eq!((err.line, err.key.as_str()), (Some(3), "nonsense"));
        let err = parse(&MINIMAL.replace("starts = 0, 1", "starts = 0, 7")).unwrap_err();
        assert_eq!(err.key, "agents.starts");
    }

    #[test]
    fn second_agent_override_and_wrap() {
        let c = parse(&format!("{MINIMAL}wrap = 2\n[algorithm.1]\nname = stay\n")).unwrap();
        assert!(matches!(c.algorithms[0], Algorithm::Wrapped { c: 2, .. }));
        assert_eq!(c.algorithms[1], Algorithm::Stay);
    }

    #[test]
    fn sweep_grid_is_a_product() {
        let raw = RawConfig::parse(
            &format!(
                "{MINIMAL}[sweep]\nadversary.p = 0.1 | 0.3\nagents.labels = 1,2 | 1,3 | 2,3\n"
            ),
            Path::new("."),
        )
        .unwrap();
        let grid = raw.sweep_grid();
        assert_eq!(grid.len(), 6);
        assert_eq!(grid[1][1], ("agents.labels".to_string(), "1,3".to_string()));
    }
}
