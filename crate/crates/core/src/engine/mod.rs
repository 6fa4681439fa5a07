//! Synchronous execution of two agents under an adversary.

mod stats;

use std::hash::{Hash, Hasher};
use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::adversary::{Adversary, AgentView, FaultDecision};
use crate::error::{invalid, Error, Result};
use crate::graph::{NodeId, Port, PortGraph};
use crate::program::{Action, BoxedProgram, Observation};

pub use stats::{
    monte_carlo, quantile, sweep, sweep_csv, MonteCarlo, Summary, SweepCell, SweepOutcome,
    TrialRecord,
};

pub const DEFAULT_HORIZON: u64 = 1_000_000;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AgentSpec {
    pub label: u64,
    pub start: NodeId,
    /// Round in which the agent wakes up.
    pub wake: u64,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub graph: Arc<PortGraph>,
    pub agents: [AgentSpec; 2],
    pub horizon: u64,
    /// Keep a per-round, per-agent trace.
    pub trace: bool,
    /// Count an agent arriving at the node of a still-dormant agent as a
    /// meeting. When off, co-location only counts once both are awake.
    pub dormant_meeting: bool,
    /// Ask agent 1 for its decision before agent 0. Results must not change.
    pub swap_order: bool,
    pub detect_crossings: bool,
}

impl RunConfig {
    pub fn new(graph: Arc<PortGraph>, agents: [AgentSpec; 2]) -> Self {
        Self {
            graph,
            agents,
            horizon: DEFAULT_HORIZON,
            trace: false,
            dormant_meeting: true,
            swap_order: false,
            detect_crossings: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let [a, b] = &self.agents;
        if a.start == b.start {
            return Err(invalid("agents must start at different nodes"));
        }
        if a.label == b.label {
            return Err(invalid("agents must have different labels"));
        }
        for s in &self.agents {
            if s.start.index() >= self.graph.node_count() {
                return Err(invalid(format!(
                    "start node {} is not in the graph",
                    s.start.0
                )));
            }
        }
        Ok(())
    }
}

/// Two agents crossed the same edge in opposite directions in one round.
/// They do not notice it.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Crossing {
    pub round: u64,
    /// Endpoint where agent 0 started the round.
    pub from: NodeId,
    pub to: NodeId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub round: u64,
    pub agent: usize,
    /// Position at the start of the round.
    pub pos: u32,
    pub awake: bool,
    pub action: Action,
    pub fault: bool,
    pub moved: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunResult {
    pub met: bool,
    /// Rounds elapsed when the agents met.
    pub meeting_round: Option<u64>,
    pub meeting_node: Option<NodeId>,
    /// Successful edge traversals by both agents up to the meeting.
    pub cost: u64,
    pub per_agent: [u64; 2],
    pub crossings: Vec<Crossing>,
    pub truncated: bool,
    /// Rounds simulated.
    pub rounds: u64,
    #[serde(skip)]
    pub trace: Option<Vec<TraceRow>>,
}

impl RunResult {
    /// The trace as JSON lines, or an empty string if none was kept.
    pub fn trace_jsonl(&self) -> String {
        let mut out = Vec::new();
        self.write_trace(&mut out).expect("writing to memory");
        String::from_utf8(out).expect("JSON is UTF-8")
    }

    pub fn write_trace(&self, mut w: impl Write) -> Result<()> {
        for row in self.trace.iter().flatten() {
            serde_json::to_writer(&mut w, row).map_err(std::io::Error::from)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// A configuration with the programs and adversary it runs.
pub struct Scenario {
    pub config: RunConfig,
    pub programs: [BoxedProgram; 2],
    pub adversary: Box<dyn Adversary>,
}

impl Scenario {
    pub fn run(mut self) -> Result<RunResult> {
        run(&self.config, self.programs, self.adversary.as_mut())
    }
}

#[derive(Clone, Debug)]
pub(crate) struct AgentState {
    pub program: BoxedProgram,
    pub pos: NodeId,
    pub wake: u64,
    pub entry: Option<Port>,
    pub fault: bool,
    pub fault_run: u64,
    pub moves: u64,
}

/// One round's decision by one agent, with its trace note.
pub(crate) type Decided = Option<(Action, Option<String>)>;

/// The full simulation state between rounds.
#[derive(Clone, Debug)]
pub(crate) struct World {
    pub graph: Arc<PortGraph>,
    pub round: u64,
    pub agents: [AgentState; 2],
    pub met: Option<(u64, NodeId)>,
    pub dormant_meeting: bool,
    pub swap_order: bool,
}

impl World {
    pub fn new(cfg: &RunConfig, programs: [BoxedProgram; 2]) -> Result<Self> {
        cfg.validate()?;
        let [p0, p1] = programs;
        let state = |spec: &AgentSpec, program| AgentState {
            program,
            pos: spec.start,
            wake: spec.wake,
            entry: None,
            fault: false,
            fault_run: 0,
            moves: 0,
        };
        Ok(Self {
            graph: Arc::clone(&cfg.graph),
            round: 0,
            agents: [state(&cfg.agents[0], p0), state(&cfg.agents[1], p1)],
            met: None,
            dormant_meeting: cfg.dormant_meeting,
            swap_order: cfg.swap_order,
        })
    }

    pub fn awake(&self, a: usize) -> bool {
        self.round >= self.agents[a].wake
    }

    pub fn cost(&self) -> u64 {
        self.agents[0].moves + self.agents[1].moves
    }

    /// Meeting at the instant the later agent wakes up.
    pub fn check_wake_meeting(&mut self) {
        if self.met.is_none()
            && self.agents[0].pos == self.agents[1].pos
            && self.awake(0)
            && self.awake(1)
        {
            self.met = Some((self.round, self.agents[0].pos));
        }
    }

    /// Both agents are awake and will stay idle forever.
    pub fn frozen(&self) -> bool {
        (0..2).all(|a| self.awake(a) && self.agents[a].program.halted())
    }

    pub fn decide(&mut self) -> Result<[Decided; 2]> {
        let mut out: [Decided; 2] = [None, None];
        let order = if self.swap_order { [1, 0] } else { [0, 1] };
        for a in order {
            if !self.awake(a) {
                continue;
            }
            let degree = self.graph.degree(self.agents[a].pos);
            let st = &mut self.agents[a];
            let obs = Observation {
                degree,
                entry_port: st.entry,
                fault: st.fault,
                met: false,
            };
            let action = st.program.decide(&obs);
            if let Action::Move(p) = action {
                if p as usize >= degree {
                    return Err(Error::ConstraintViolation {
                        round: self.round,
                        agent: a,
                        reason: format!("port {p} out of range at a node of degree {degree}"),
                    });
                }
            }
            out[a] = Some((action, st.program.take_note()));
        }
        Ok(out)
    }

    pub fn views(&self, decided: &[Decided; 2]) -> [AgentView; 2] {
        [0, 1].map(|a| AgentView {
            awake: self.awake(a),
            node: self.agents[a].pos,
            action: decided[a].as_ref().map_or(Action::Idle, |d| d.0),
            fault_run: self.agents[a].fault_run,
        })
    }

    /// Executes the decided actions. `bound` is the fault bound to enforce.
    pub fn apply(
        &mut self,
        decided: [Decided; 2],
        decisions: [FaultDecision; 2],
        bound: Option<u64>,
        crossings: Option<&mut Vec<Crossing>>,
        mut trace: Option<&mut Vec<TraceRow>>,
    ) -> Result<()> {
        let round = self.round;
        let mut hops: [Option<(NodeId, NodeId, Port, Port)>; 2] = [None, None];
        for (a, d) in decided.iter().enumerate() {
            let action = d.as_ref().map_or(Action::Idle, |d| d.0);
            let blocked = action.is_move() && decisions[a] == FaultDecision::Fault;
            if blocked {
                if let Some(c) = bound {
                    if self.agents[a].fault_run >= c {
                        return Err(Error::ConstraintViolation {
                            round,
                            agent: a,
                            reason: format!("more than {c} consecutive faults"),
                        });
                    }
                }
            }
            let from = self.agents[a].pos;
            if let (Action::Move(p), false) = (action, blocked) {
                let (to, entry) = self.graph.traverse(from, p)?;
                hops[a] = Some((from, to, p, entry));
            }
            if let Some(rows) = trace.as_deref_mut() {
                rows.push(TraceRow {
                    round,
                    agent: a,
                    pos: from.0,
                    awake: d.is_some(),
                    action,
                    fault: blocked,
                    moved: hops[a].is_some(),
                    note: d.as_ref().and_then(|d| d.1.clone()),
                });
            }
            let st = &mut self.agents[a];
            st.fault = blocked;
            st.fault_run = if blocked { st.fault_run + 1 } else { 0 };
        }
        if let (Some(list), [Some(h0), Some(h1)]) = (crossings, hops) {
            if h0.0 == h1.1 && h0.1 == h1.0 && h0.3 == h1.2 {
                list.push(Crossing {
                    round,
                    from: h0.0,
                    to: h0.1,
                });
            }
        }
        for (a, hop) in hops.iter().enumerate() {
            if let Some((_, to, _, entry)) = *hop {
                let st = &mut self.agents[a];
                st.pos = to;
                st.entry = Some(entry);
                st.moves += 1;
            }
        }
        self.round += 1;
        if self.agents[0].pos == self.agents[1].pos
            && (self.dormant_meeting || (self.awake(0) && self.awake(1)))
        {
            self.met = Some((self.round, self.agents[0].pos));
        }
        Ok(())
    }

    /// Hash of everything that determines the rest of the execution apart
    /// from the distance to the horizon. The round only matters until the
    /// last agent wakes up.
    pub fn fingerprint(&self) -> u128 {
        let clock = self.round.min(self.agents[0].wake.max(self.agents[1].wake));
        let half = |salt: u8| {
            let mut h = std::collections::hash_map::DefaultHasher::new();
            salt.hash(&mut h);
            clock.hash(&mut h);
            for st in &self.agents {
                st.pos.hash(&mut h);
                st.entry.hash(&mut h);
                st.fault.hash(&mut h);
                st.fault_run.hash(&mut h);
                st.program.hash(&mut h);
            }
            h.finish()
        };
        (half(0) as u128) << 64 | half(1) as u128
    }
}

/// Runs two programs until they meet or the horizon is reached.
pub fn run(
    cfg: &RunConfig,
    programs: [BoxedProgram; 2],
    adversary: &mut dyn Adversary,
) -> Result<RunResult> {
    let model = adversary.model();
    model.validate()?;
    let bound = model.bound();
    let mut world = World::new(cfg, programs)?;
    let mut crossings = Vec::new();
    let mut trace = cfg.trace.then(Vec::new);
    let mut rounds = 0;
    while world.round < cfg.horizon {
        world.check_wake_meeting();
        if world.met.is_some() {
            break;
        }
        if trace.is_none() && world.frozen() {
            rounds = cfg.horizon;
            break;
        }
        let decided = world.decide()?;
        let views = world.views(&decided);
        let decisions = adversary.decide(world.round, &views);
        world.apply(
            decided,
            decisions,
            bound,
            cfg.detect_crossings.then_some(&mut crossings),
            trace.as_mut(),
        )?;
        rounds = world.round;
        if world.met.is_some() {
            break;
        }
    }
    let per_agent = [world.agents[0].moves, world.agents[1].moves];
    Ok(RunResult {
        met: world.met.is_some(),
        meeting_round: world.met.map(|m| m.0),
        meeting_node: world.met.map(|m| m.1),
        cost: per_agent[0] + per_agent[1],
        per_agent,
        crossings,
        truncated: world.met.is_none(),
        rounds,
        trace,
    })
}
