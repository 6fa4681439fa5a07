//! Building programs and adversaries from plain descriptions.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::adversary::{
    Adversary, FaultModel, FaultSchedule, MaxDelay, NoFaults, RandomFaults, Release, Scripted,
    Tough,
};
use crate::algorithms::{
    AcWrapper, AlwaysAttack, FiniteAttack, GraphRvBf, Harvest, KnownBound, OrientedRingProgram,
    RvRf, Stay, TreeRvUf, UrbpProgram, WalkLength,
};
use crate::asynch::DefaultAsynchWalk;
use crate::error::{invalid, Result};
use crate::graph::Port;
use crate::program::BoxedProgram;
use crate::uxs::UxsLibrary;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
pub enum Algorithm {
    RvRf,
    TreeRvUf,
    OrientedRing {
        n: u64,
    },
    KnownBound {
        m: usize,
    },
    GraphRvBf,
    Harvest {
        coef: u64,
        exp: u32,
    },
    Urbp,
    AlwaysAttack {
        port: Port,
    },
    FiniteAttack {
        k: u64,
        port: Port,
    },
    Stay,
    /// `inner` stretched to tolerate `c` consecutive faults.
    Wrapped {
        c: u64,
        inner: Box<Algorithm>,
    },
}

impl Algorithm {
    pub fn build(&self, label: u64, library: &Arc<UxsLibrary>) -> Result<BoxedProgram> {
        Ok(match self {
            Algorithm::RvRf => {
                let walk = DefaultAsynchWalk::new(label, Arc::clone(library))?;
                Box::new(RvRf::new(label, walk)?)
            }
            Algorithm::TreeRvUf => Box::new(TreeRvUf::new(label)?),
            Algorithm::OrientedRing { n } => Box::new(OrientedRingProgram::new(label, *n)?),
            Algorithm::KnownBound { m } => Box::new(KnownBound::new(label, *m, library)?),
            Algorithm::GraphRvBf => Box::new(GraphRvBf::new(label, Arc::clone(library))?),
            Algorithm::Harvest { coef, exp } => Box::new(Harvest::new(
                label,
                WalkLength {
                    coef: *coef,
                    exp: *exp,
                },
            )?),
            Algorithm::Urbp => Box::new(UrbpProgram::new()),
            Algorithm::AlwaysAttack { port } => Box::new(AlwaysAttack { port: *port }),
            Algorithm::FiniteAttack { k, port } => Box::new(FiniteAttack::new(*k, *port)),
            Algorithm::Stay => Box::new(Stay),
            Algorithm::Wrapped { c, inner } => {
                Box::new(AcWrapper::new(inner.build(label, library)?, *c)?)
            }
        })
    }

    /// Parses `name` with `key=value` parameters, as used in config files.
    pub fn from_parts(name: &str, params: &[(&str, &str)]) -> Result<Self> {
        let get = |key: &str| -> Result<&str> {
            params
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| *v)
                .ok_or_else(|| invalid(format!("algorithm {name} needs parameter `{key}`")))
        };
        let num = |key: &str| -> Result<u64> {
            let v = get(key)?;
            v.parse().map_err(|_| {
                invalid(format!(
                    "parameter `{key}` must be a non-negative integer, got `{v}`"
                ))
            })
        };
        let alg = match name {
            "rv-rf" => Algorithm::RvRf,
            "tree-rv-uf" => Algorithm::TreeRvUf,
            "oriented-ring" => Algorithm::OrientedRing { n: num("n")? },
            "known-bound" => Algorithm::KnownBound {
                m: num("m")? as usize,
            },
            "graph-rv-bf" => Algorithm::GraphRvBf,
            "harvest" => Algorithm::Harvest {
                coef: num("coef")?,
                exp: num("exp")? as u32,
            },
            "urbp" => Algorithm::Urbp,
            "always-attack" => Algorithm::AlwaysAttack {
                port: num("port")? as Port,
            },
            "finite-attack" => Algorithm::FiniteAttack {
                k: num("k")?,
                port: num("port")? as Port,
            },
            "stay" => Algorithm::Stay,
            other => return Err(invalid(format!("unknown algorithm `{other}`"))),
        };
        Ok(alg)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::RvRf => f.write_str("rv-rf"),
            Algorithm::TreeRvUf => f.write_str("tree-rv-uf"),
            Algorithm::OrientedRing { n } => write!(f, "oriented-ring(n={n})"),
            Algorithm::KnownBound { m } => write!(f, "known-bound(m={m})"),
            Algorithm::GraphRvBf => f.write_str("graph-rv-bf"),
            Algorithm::Harvest { coef, exp } => write!(f, "harvest(Q={coef}n^{exp})"),
            Algorithm::Urbp => f.write_str("urbp"),
            Algorithm::AlwaysAttack { port } => write!(f, "always-attack(port={port})"),
            Algorithm::FiniteAttack { k, port } => write!(f, "finite-attack(k={k}, port={port})"),
            Algorithm::Stay => f.write_str("stay"),
            Algorithm::Wrapped { c, inner } => write!(f, "A({c})[{inner}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AdversarySpec {
    None,
    Random {
        p: f64,
    },
    MaxDelay {
        c: u64,
    },
    Tough {
        patience: u64,
        release: Release,
    },
    Scripted {
        schedule: FaultSchedule,
        model: FaultModel,
    },
}

impl AdversarySpec {
    /// `seed` only affects random faults.
    pub fn build(&self, seed: u64) -> Result<Box<dyn Adversary>> {
        Ok(match self {
            AdversarySpec::None => Box::new(NoFaults),
            AdversarySpec::Random { p } => Box::new(RandomFaults::new(*p, seed)?),
            AdversarySpec::MaxDelay { c } => Box::new(MaxDelay::new(*c)?),
            AdversarySpec::Tough { patience, release } => {
                Box::new(Tough::new(*patience, *release)?)
            }
            AdversarySpec::Scripted { schedule, model } => {
                Box::new(Scripted::new(schedule.clone(), *model)?)
            }
        })
    }
}
