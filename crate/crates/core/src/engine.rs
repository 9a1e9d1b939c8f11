//! Synchronous beeping rounds.
//!
//! Each round has two exchanges. In the first, every active node beeps with
//! its current probability and every neighbour hears it. In the second, a node
//! that beeped without hearing anything joins the MIS and its active
//! neighbours drop out. Nodes that remain active then feed back whether they
//! heard a beep into the policy.
//!
//! Randomness: one ChaCha8 stream per run, seeded from the run seed. Each
//! round draws one `u64` per active node, in ascending node order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::Graph;
use crate::policy::{Policy, PolicyState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeStatus {
    Active,
    InMis,
    InactiveNeighbour,
}

/// What happened in one round. All lists are sorted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RoundOutcome {
    pub beeped: Vec<usize>,
    pub joined_mis: Vec<usize>,
    /// Joiners plus the active neighbours they knocked out.
    pub newly_inactive: Vec<usize>,
}

/// State of one run in progress.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    round: u64,
    status: Vec<NodeStatus>,
    policy: PolicyState,
    beeps: Vec<u64>,
    active: Vec<usize>,
}

impl SimState {
    pub fn new(graph: &Graph, policy: &Policy) -> Self {
        let n = graph.node_count();
        Self {
            round: 0,
            status: vec![NodeStatus::Active; n],
            policy: policy.init(n),
            beeps: vec![0; n],
            active: (0..n).collect(),
        }
    }

    /// Number of completed rounds.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn node_count(&self) -> usize {
        self.status.len()
    }

    pub fn status(&self, v: usize) -> NodeStatus {
        self.status[v]
    }

    pub fn statuses(&self) -> &[NodeStatus] {
        &self.status
    }

    pub fn policy(&self) -> &PolicyState {
        &self.policy
    }

    /// Cumulative beeps emitted by each node.
    pub fn beep_counts(&self) -> &[u64] {
        &self.beeps
    }

    /// Active nodes, ascending.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn is_finished(&self) -> bool {
        self.active.is_empty()
    }

    /// Current beep probability of `v`; zero once `v` is inactive.
    pub fn beep_probability(&self, v: usize) -> f64 {
        if self.status[v] == NodeStatus::Active {
            self.policy.beep_probability(v)
        } else {
            0.0
        }
    }

    pub fn mis(&self) -> Vec<usize> {
        (0..self.status.len())
            .filter(|&v| self.status[v] == NodeStatus::InMis)
            .collect()
    }
}

/// Bernoulli draw with probability `p` from a single `u64`. Exact for every
/// dyadic `p >= 2^-64`.
fn sample(p: f64, rng: &mut impl RngCore) -> bool {
    let threshold = (p * 18_446_744_073_709_551_616.0) as u128;
    (rng.next_u64() as u128) < threshold
}

/// Executes one round.
pub fn step(state: &mut SimState, graph: &Graph, rng: &mut impl RngCore) -> RoundOutcome {
    assert_eq!(
        state.node_count(),
        graph.node_count(),
        "state and graph disagree on node count"
    );
    let n = graph.node_count();

    // First exchange.
    let mut beeped = Vec::new();
    for &v in &state.active {
        if sample(state.policy.beep_probability(v), rng) {
            beeped.push(v);
        }
    }
    let mut heard = vec![false; n];
    let mut is_beeper = vec![false; n];
    for &v in &beeped {
        is_beeper[v] = true;
        state.beeps[v] += 1;
        for &w in graph.neighbours(v) {
            heard[w] = true;
        }
    }

    // Second exchange.
    let joined_mis: Vec<usize> = beeped.iter().copied().filter(|&v| !heard[v]).collect();
    let mut newly_inactive = Vec::new();
    for &v in &joined_mis {
        state.status[v] = NodeStatus::InMis;
        newly_inactive.push(v);
    }
    for &v in &joined_mis {
        for &w in graph.neighbours(v) {
            if state.status[w] == NodeStatus::Active {
                state.status[w] = NodeStatus::InactiveNeighbour;
                newly_inactive.push(w);
            }
        }
    }
    newly_inactive.sort_unstable();

    // Feedback for survivors. A survivor that heard a beep cannot have a
    // joining neighbour, so `heard` alone selects the rule.
    state
        .active
        .retain(|&v| state.status[v] == NodeStatus::Active);
    for &v in &state.active {
        debug_assert!(!is_beeper[v] || heard[v]);
        state.policy.update_feedback(v, heard[v]);
    }
    state.policy.advance_round();
    state.round += 1;

    RoundOutcome {
        beeped,
        joined_mis,
        newly_inactive,
    }
}

/// Default round cap: `64 * ceil(log2(n + 2))^2 + 64`.
pub fn default_max_rounds(node_count: usize) -> u64 {
    let x = node_count as u64 + 2;
    // ceil(log2(x)) for x >= 2
    let log = 64 - (x - 1).leading_zeros() as u64;
    64 * log * log + 64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunConfig {
    /// `None` selects [`default_max_rounds`].
    pub max_rounds: Option<u64>,
    pub record_trace: bool,
}

impl RunConfig {
    pub fn with_max_rounds(max_rounds: u64) -> Self {
        Self {
            max_rounds: Some(max_rounds),
            record_trace: false,
        }
    }

    pub fn traced(mut self) -> Self {
        self.record_trace = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub mis: Vec<usize>,
    pub rounds: u64,
    pub beeps: Vec<u64>,
    pub total_beeps: u64,
    pub terminated: bool,
    pub trace: Option<Vec<RoundOutcome>>,
}

impl RunResult {
    pub fn node_count(&self) -> usize {
        self.beeps.len()
    }

    /// Total beeps divided by node count; zero for the empty graph.
    pub fn beeps_per_node(&self) -> f64 {
        if self.beeps.is_empty() {
            0.0
        } else {
            self.total_beeps as f64 / self.beeps.len() as f64
        }
    }
}

/// Runs until every node is inactive or the round cap is reached.
pub fn run(graph: &Graph, policy: &Policy, seed: u64, config: RunConfig) -> RunResult {
    let max_rounds = config
        .max_rounds
        .unwrap_or_else(|| default_max_rounds(graph.node_count()));
    assert!(max_rounds >= 1, "max_rounds must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = SimState::new(graph, policy);
    let mut trace = config.record_trace.then(Vec::new);
    while !state.is_finished() && state.round() < max_rounds {
        let outcome = step(&mut state, graph, &mut rng);
        if let Some(trace) = trace.as_mut() {
            trace.push(outcome);
        }
    }
    let beeps = state.beep_counts().to_vec();
    RunResult {
        mis: state.mis(),
        rounds: state.round(),
        total_beeps: beeps.iter().sum(),
        beeps,
        terminated: state.is_finished(),
        trace,
    }
}

/// Sum of the current beep probabilities of `v`'s active neighbours.
/// Diagnostic only.
pub fn neighbourhood_weight(state: &SimState, graph: &Graph, v: usize) -> Result<f64, EngineError> {
    if v >= graph.node_count() || v >= state.node_count() {
        return Err(EngineError::InvalidParameter(format!(
            "node {v} out of range for {} nodes",
            graph.node_count()
        )));
    }
    Ok(graph
        .neighbours(v)
        .iter()
        .map(|&w| state.beep_probability(w))
        .sum())
}
