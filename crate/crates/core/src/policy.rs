//! Beep-probability rules.
//!
//! A [`Policy`] is the configuration (what the CLI parses and what ends up in
//! the CSV `policy` column). [`PolicyState`] is the mutable per-run state it
//! creates.
//!
//! Local feedback keeps an integer exponent per node and beeps with
//! probability `2^-n`: one step up after hearing a beep, one step down (never
//! below the cap) after a silent round. With the default parameters every
//! probability is an exact dyadic rational. Non-default factors switch to a
//! floating-point representation clamped to `[MIN_PROBABILITY, cap]`.
//!
//! The global sweep runs in phases `k = 1, 2, ...` of `k + 1` steps. Within a
//! phase the probability starts at 1 and halves every step, giving
//! `1, 1/2, 1, 1/2, 1/4, 1, 1/2, 1/4, 1/8, ...`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Smallest probability the generalized feedback mode will decay to.
pub const MIN_PROBABILITY: f64 = 1.0 / 18_446_744_073_709_551_616.0; // 2^-64

/// Exponent ceiling for exact feedback; `2^-1074` is the smallest positive f64.
pub const MAX_EXPONENT: u32 = 1074;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error(
        "unknown policy {0:?}; expected feedback, feedback:f=..,init=..,cap=.., sweep or const:<p>"
    )]
    Unknown(String),
    #[error("malformed policy parameter {0:?}")]
    Malformed(String),
    #[error("{name} = {value} out of range: {reason}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

/// Parameters of the local-feedback rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackParams {
    /// Multiplicative step, `> 1`.
    pub factor: f64,
    /// Starting probability for every node, `0 < initial <= cap`.
    pub initial: f64,
    /// Upper bound on the probability, `0 < cap <= 1`.
    pub cap: f64,
}

impl Default for FeedbackParams {
    fn default() -> Self {
        Self {
            factor: 2.0,
            initial: 0.5,
            cap: 0.5,
        }
    }
}

impl FeedbackParams {
    pub fn new(factor: f64, initial: f64, cap: f64) -> Result<Self, PolicyError> {
        if !(factor.is_finite() && factor > 1.0) {
            return Err(PolicyError::OutOfRange {
                name: "f",
                value: factor,
                reason: "factor must exceed 1",
            });
        }
        if !(cap > 0.0 && cap <= 1.0) {
            return Err(PolicyError::OutOfRange {
                name: "cap",
                value: cap,
                reason: "cap must be in (0, 1]",
            });
        }
        if !(initial > 0.0 && initial <= cap) {
            return Err(PolicyError::OutOfRange {
                name: "init",
                value: initial,
                reason: "initial probability must be in (0, cap]",
            });
        }
        Ok(Self {
            factor,
            initial,
            cap,
        })
    }

    /// `(initial exponent, floor exponent)` when the rule can run on exact
    /// integer exponents: factor 2 and both probabilities powers of two.
    fn dyadic_exponents(&self) -> Option<(u32, u32)> {
        if self.factor != 2.0 {
            return None;
        }
        Some((dyadic_exponent(self.initial)?, dyadic_exponent(self.cap)?))
    }
}

/// `k` such that `p == 2^-k`, if any.
fn dyadic_exponent(p: f64) -> Option<u32> {
    (0..=MAX_EXPONENT).find(|&k| exact_power(k) == p)
}

/// `2^-k` computed exactly.
pub fn exact_power(k: u32) -> f64 {
    debug_assert!(k <= MAX_EXPONENT);
    // powi is exact for powers of two down to the subnormal range.
    0.5f64.powi(k as i32)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Policy {
    LocalFeedback(FeedbackParams),
    GlobalSweep,
    Constant(f64),
}

impl Policy {
    pub fn feedback() -> Self {
        Policy::LocalFeedback(FeedbackParams::default())
    }

    pub fn constant(p: f64) -> Result<Self, PolicyError> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(PolicyError::OutOfRange {
                name: "p",
                value: p,
                reason: "probability must be in (0, 1]",
            });
        }
        Ok(Policy::Constant(p))
    }

    /// Fresh state for a graph with `node_count` nodes.
    pub fn init(&self, node_count: usize) -> PolicyState {
        match *self {
            Policy::LocalFeedback(params) => {
                PolicyState::Feedback(FeedbackState::new(params, node_count))
            }
            Policy::GlobalSweep => PolicyState::Sweep(SweepState::new()),
            Policy::Constant(p) => PolicyState::Constant(p),
        }
    }

    /// Short family name: `feedback`, `sweep` or `const`.
    pub fn kind(&self) -> &'static str {
        match self {
            Policy::LocalFeedback(_) => "feedback",
            Policy::GlobalSweep => "sweep",
            Policy::Constant(_) => "const",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::LocalFeedback(params) if *params == FeedbackParams::default() => {
                f.write_str("feedback")
            }
            Policy::LocalFeedback(p) => {
                write!(
                    f,
                    "feedback:f={},init={},cap={}",
                    p.factor, p.initial, p.cap
                )
            }
            Policy::GlobalSweep => f.write_str("sweep"),
            Policy::Constant(p) => write!(f, "const:{p}"),
        }
    }
}

impl FromStr for Policy {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "feedback" => return Ok(Policy::feedback()),
            "sweep" => return Ok(Policy::GlobalSweep),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("const:") {
            let p = parse_float(rest)?;
            return Policy::constant(p);
        }
        if let Some(rest) = s.strip_prefix("feedback:") {
            let mut params = FeedbackParams::default();
            for item in rest.split(',') {
                let (key, value) = item
                    .split_once('=')
                    .ok_or_else(|| PolicyError::Malformed(item.to_string()))?;
                let value = parse_float(value)?;
                match key.trim() {
                    "f" => params.factor = value,
                    "init" => params.initial = value,
                    "cap" => params.cap = value,
                    _ => return Err(PolicyError::Malformed(item.to_string())),
                }
            }
            let params = FeedbackParams::new(params.factor, params.initial, params.cap)?;
            return Ok(Policy::LocalFeedback(params));
        }
        Err(PolicyError::Unknown(s.to_string()))
    }
}

fn parse_float(s: &str) -> Result<f64, PolicyError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| PolicyError::Malformed(s.to_string()))
}

/// Per-node state of the local-feedback rule.
#[derive(Debug, Clone, PartialEq)]
pub enum FeedbackState {
    /// Probability `2^-exponent[v]`, exponent never below `floor`.
    Exact { exponents: Vec<u32>, floor: u32 },
    /// Probability stored directly, kept within `[MIN_PROBABILITY, cap]`.
    Scaled {
        probabilities: Vec<f64>,
        factor: f64,
        cap: f64,
    },
}

impl FeedbackState {
    pub fn new(params: FeedbackParams, node_count: usize) -> Self {
        match params.dyadic_exponents() {
            Some((initial, floor)) => FeedbackState::Exact {
                exponents: vec![initial; node_count],
                floor,
            },
            None => FeedbackState::Scaled {
                probabilities: vec![params.initial.max(MIN_PROBABILITY); node_count],
                factor: params.factor,
                cap: params.cap,
            },
        }
    }

    pub fn probability(&self, v: usize) -> f64 {
        match self {
            FeedbackState::Exact { exponents, .. } => exact_power(exponents[v]),
            FeedbackState::Scaled { probabilities, .. } => probabilities[v],
        }
    }

    /// Exponent of `v` in exact mode.
    pub fn exponent(&self, v: usize) -> Option<u32> {
        match self {
            FeedbackState::Exact { exponents, .. } => Some(exponents[v]),
            FeedbackState::Scaled { .. } => None,
        }
    }

    /// Applies one round of feedback to `v`: a heard beep lowers the
    /// probability by one step, silence raises it by one step up to the cap.
    pub fn update(&mut self, v: usize, heard_beep: bool) {
        match self {
            FeedbackState::Exact { exponents, floor } => {
                let n = &mut exponents[v];
                *n = if heard_beep {
                    (*n + 1).min(MAX_EXPONENT)
                } else {
                    n.saturating_sub(1).max(*floor)
                };
            }
            FeedbackState::Scaled {
                probabilities,
                factor,
                cap,
            } => {
                let p = &mut probabilities[v];
                *p = if heard_beep {
                    (*p / *factor).max(MIN_PROBABILITY)
                } else {
                    (*p * *factor).min(*cap)
                };
            }
        }
    }
}

/// Position in the global sweep schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepState {
    step: u64,
    phase: u64,
    position: u64,
}

impl Default for SweepState {
    fn default() -> Self {
        Self::new()
    }
}

impl SweepState {
    pub fn new() -> Self {
        Self {
            step: 1,
            phase: 1,
            position: 0,
        }
    }

    /// State positioned at 1-based `step`.
    pub fn at_step(step: u64) -> Self {
        assert!(step >= 1, "sweep steps are 1-based");
        let (phase, position) = sweep_phase(step);
        Self {
            step,
            phase,
            position,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn phase(&self) -> u64 {
        self.phase
    }

    pub fn position(&self) -> u64 {
        self.position
    }

    pub fn probability(&self) -> f64 {
        exact_power(self.position.min(MAX_EXPONENT as u64) as u32)
    }

    /// Moves to the next step; a phase `k` ends after position `k`.
    pub fn advance(&mut self) {
        self.step += 1;
        if self.position == self.phase {
            self.phase += 1;
            self.position = 0;
        } else {
            self.position += 1;
        }
    }
}

/// First step of phase `k` (1-based): `1 + (k-1)(k+2)/2`.
pub fn sweep_phase_start(phase: u64) -> u64 {
    debug_assert!(phase >= 1);
    1 + (phase - 1) * (phase + 2) / 2
}

/// `(phase, position)` of a 1-based step: the phase is the largest `k` whose
/// start does not exceed `step`.
pub fn sweep_phase(step: u64) -> (u64, u64) {
    debug_assert!(step >= 1);
    // Start from the real-valued root of (k-1)(k+2)/2 = step-1 and correct.
    let approx = ((-1.0 + (9.0 + 8.0 * (step - 1) as f64).sqrt()) / 2.0).floor() as u64;
    let mut phase = approx.max(1);
    while sweep_phase_start(phase) > step {
        phase -= 1;
    }
    while sweep_phase_start(phase + 1) <= step {
        phase += 1;
    }
    (phase, step - sweep_phase_start(phase))
}

/// Sweep probability at a 1-based step.
pub fn sweep_probability(step: u64) -> f64 {
    SweepState::at_step(step).probability()
}

/// Mutable policy state for one run.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyState {
    Feedback(FeedbackState),
    Sweep(SweepState),
    Constant(f64),
}

impl PolicyState {
    /// Probability that active node `v` beeps in the current round.
    pub fn beep_probability(&self, v: usize) -> f64 {
        match self {
            PolicyState::Feedback(state) => state.probability(v),
            PolicyState::Sweep(state) => state.probability(),
            PolicyState::Constant(p) => *p,
        }
    }

    /// Feedback for a node that is still active after the round. Only the
    /// local-feedback rule reacts.
    pub fn update_feedback(&mut self, v: usize, heard_beep: bool) {
        if let PolicyState::Feedback(state) = self {
            state.update(v, heard_beep);
        }
    }

    /// End-of-round bookkeeping. Only the sweep schedule moves.
    pub fn advance_round(&mut self) {
        if let PolicyState::Sweep(state) = self {
            state.advance();
        }
    }
}
