//! Simulator for maximal-independent-set selection in the beeping model.
//!
//! Nodes communicate only through anonymous one-bit beeps in synchronous
//! rounds. The crate provides:
//!
//! - [`graph`]: graphs, generators and the edge-list format,
//! - [`policy`]: beep-probability rules (local feedback, global sweep, constant),
//! - [`engine`]: round execution and complete runs,
//! - [`verify`]: independent MIS checks and exhaustive enumeration,
//! - [`metrics`]: trial records, summaries and CSV output,
//! - [`experiment`]: seeded Monte-Carlo trials, parallel with the `parallel`
//!   feature (on by default).

pub mod engine;
pub mod experiment;
pub mod graph;
pub mod metrics;
pub mod policy;
pub mod verify;

pub use engine::{run, step, NodeStatus, RoundOutcome, RunConfig, RunResult, SimState};
pub use experiment::{
    run_experiment, run_lowerbound, stable_mix, Execution, ExperimentError, ExperimentSpec, Family,
    GraphSpec,
};
pub use graph::{Graph, GraphError};
pub use metrics::{summarize, Field, SummaryStats, TrialRecord};
pub use policy::{FeedbackParams, Policy, PolicyState};
pub use verify::{check_mis, enumerate_mis, VerifyReport, Witness};
