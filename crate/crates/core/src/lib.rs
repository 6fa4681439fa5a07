//! Two-agent rendezvous on anonymous port-labeled graphs under delay faults.

pub mod adversary;
pub mod algorithms;
pub mod asynch;
pub mod engine;
pub mod error;
pub mod graph;
pub mod program;
pub mod setup;
pub mod uxs;

pub use error::{Error, Result};
pub use graph::{NodeId, Port, PortGraph};
pub use program::{Action, AgentProgram, BoxedProgram, Observation, Program};
