//! Monte-Carlo trial harness.
//!
//! An [`ExperimentSpec`] expands to `trials x |n values|` independent runs.
//! Every trial gets its own seed from [`stable_mix`], so the assignment of
//! seeds to trials never depends on scheduling, and results are sorted by
//! `(n, trial)` before they are returned. Sequential and parallel execution
//! therefore produce identical records.

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::engine::{run, RunConfig, RunResult};
use crate::graph::{
    clique_family, complete_graph, erdos_renyi, grid_graph, parse_edge_list, path_graph, Graph,
    GraphError,
};
use crate::metrics::TrialRecord;
use crate::policy::Policy;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid graph source {0:?}")]
    BadSource(String),
    #[error("invalid experiment: {0}")]
    InvalidSpec(String),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[cfg(feature = "parallel")]
    #[error("building thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

/// SplitMix64 output function applied to `x + 0x9E3779B97F4A7C15`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial seed: `splitmix64(splitmix64(splitmix64(master) ^ n) ^ trial)`.
///
/// `n` is the size parameter of the trial's family (node count, or `m` for
/// clique families), not the policy, so different policies see the same seeds
/// and, for random families, the same graphs.
pub fn stable_mix(master_seed: u64, n: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ n) ^ trial)
}

/// Seed for generating a random graph from a trial or run seed. Kept apart
/// from the run seed so graph and protocol randomness are not correlated.
pub fn graph_seed(seed: u64) -> u64 {
    splitmix64(seed ^ 0x6772_6170_6873_6565)
}

/// A single concrete graph: `er:<n>,<p>`, `grid:<r>,<c>`, `clique:<d>`,
/// `cliquefam:<m>`, `path:<n>` or `file:<path>`.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    ErdosRenyi { n: usize, p: f64 },
    Grid { rows: usize, cols: usize },
    Clique(usize),
    CliqueFamily(usize),
    Path(usize),
    File(PathBuf),
}

fn parse_usize(s: &str, whole: &str) -> Result<usize, ExperimentError> {
    s.trim()
        .parse()
        .map_err(|_| ExperimentError::BadSource(whole.to_string()))
}

fn parse_prob(s: &str, whole: &str) -> Result<f64, ExperimentError> {
    s.trim()
        .parse()
        .map_err(|_| ExperimentError::BadSource(whole.to_string()))
}

fn split_pair<'a>(s: &'a str, whole: &str) -> Result<(&'a str, &'a str), ExperimentError> {
    s.split_once(',')
        .ok_or_else(|| ExperimentError::BadSource(whole.to_string()))
}

impl FromStr for GraphSpec {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| ExperimentError::BadSource(s.to_string()))?;
        Ok(match kind {
            "er" => {
                let (n, p) = split_pair(rest, s)?;
                GraphSpec::ErdosRenyi {
                    n: parse_usize(n, s)?,
                    p: parse_prob(p, s)?,
                }
            }
            "grid" => {
                let (r, c) = split_pair(rest, s)?;
                GraphSpec::Grid {
                    rows: parse_usize(r, s)?,
                    cols: parse_usize(c, s)?,
                }
            }
            "clique" => GraphSpec::Clique(parse_usize(rest, s)?),
            "cliquefam" => GraphSpec::CliqueFamily(parse_usize(rest, s)?),
            "path" => GraphSpec::Path(parse_usize(rest, s)?),
            "file" if !rest.is_empty() => GraphSpec::File(PathBuf::from(rest)),
            _ => return Err(ExperimentError::BadSource(s.to_string())),
        })
    }
}

impl GraphSpec {
    /// Builds the graph. `seed` only matters for `er`.
    pub fn build(&self, seed: u64) -> Result<Graph, ExperimentError> {
        Ok(match *self {
            GraphSpec::ErdosRenyi { n, p } => erdos_renyi(n, p, graph_seed(seed))?,
            GraphSpec::Grid { rows, cols } => grid_graph(rows, cols)?,
            GraphSpec::Clique(d) => complete_graph(d)?,
            GraphSpec::CliqueFamily(m) => clique_family(m)?,
            GraphSpec::Path(n) => path_graph(n)?,
            GraphSpec::File(ref path) => load_edge_list(path)?,
        })
    }

    /// `(family, param)` columns for CSV output.
    pub fn describe(&self) -> (String, String) {
        match self {
            GraphSpec::ErdosRenyi { p, .. } => ("er".into(), p.to_string()),
            GraphSpec::Grid { rows, cols } => ("grid".into(), format!("{rows}x{cols}")),
            GraphSpec::Clique(d) => ("clique".into(), d.to_string()),
            GraphSpec::CliqueFamily(m) => ("cliquefam".into(), m.to_string()),
            GraphSpec::Path(n) => ("path".into(), n.to_string()),
            GraphSpec::File(path) => ("file".into(), path.display().to_string()),
        }
    }
}

pub fn load_edge_list(path: &std::path::Path) -> Result<Graph, ExperimentError> {
    let text = fs::read_to_string(path).map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_edge_list(&text)?)
}

/// A graph family indexed by a size parameter: `er:<p>`, `grid` (square
/// `ceil(sqrt n)` side), `clique`, `cliquefam` (size is `m`), `path`, or
/// `file:<path>` (size ignored).
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    ErdosRenyi(f64),
    SquareGrid,
    Clique,
    CliqueFamily,
    Path,
    File(PathBuf),
}

impl FromStr for Family {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.split_once(':') {
            Some(("er", p)) => Family::ErdosRenyi(parse_prob(p, s)?),
            Some(("file", path)) if !path.is_empty() => Family::File(PathBuf::from(path)),
            None => match s {
                "grid" => Family::SquareGrid,
                "clique" => Family::Clique,
                "cliquefam" => Family::CliqueFamily,
                "path" => Family::Path,
                _ => return Err(ExperimentError::BadSource(s.to_string())),
            },
            _ => return Err(ExperimentError::BadSource(s.to_string())),
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::ErdosRenyi(p) => write!(f, "er:{p}"),
            Family::SquareGrid => f.write_str("grid"),
            Family::Clique => f.write_str("clique"),
            Family::CliqueFamily => f.write_str("cliquefam"),
            Family::Path => f.write_str("path"),
            Family::File(path) => write!(f, "file:{}", path.display()),
        }
    }
}

/// Smallest `s` with `s * s >= n`.
pub fn ceil_sqrt(n: usize) -> usize {
    let mut s = (n as f64).sqrt() as usize;
    while s * s < n {
        s += 1;
    }
    while s > 0 && (s - 1) * (s - 1) >= n {
        s -= 1;
    }
    s
}

impl Family {
    /// The concrete graph for size parameter `size`.
    pub fn instance(&self, size: usize) -> GraphSpec {
        match *self {
            Family::ErdosRenyi(p) => GraphSpec::ErdosRenyi { n: size, p },
            Family::SquareGrid => {
                let side = ceil_sqrt(size);
                GraphSpec::Grid {
                    rows: side,
                    cols: side,
                }
            }
            Family::Clique => GraphSpec::Clique(size),
            Family::CliqueFamily => GraphSpec::CliqueFamily(size),
            Family::Path => GraphSpec::Path(size),
            Family::File(ref path) => GraphSpec::File(path.clone()),
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, Family::ErdosRenyi(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub policy: Policy,
    pub family: Family,
    /// Size parameters; a `file` family needs exactly one placeholder entry.
    pub n_values: Vec<usize>,
    pub trials: u64,
    pub master_seed: u64,
    pub max_rounds: Option<u64>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.trials == 0 {
            return Err(ExperimentError::InvalidSpec(
                "trials must be at least 1".into(),
            ));
        }
        if self.n_values.is_empty() {
            return Err(ExperimentError::InvalidSpec("no n values given".into()));
        }
        if let Some(&bad) = self.n_values.iter().find(|&&n| n == 0) {
            return Err(ExperimentError::InvalidSpec(format!(
                "n value {bad} must be positive"
            )));
        }
        if self.max_rounds == Some(0) {
            return Err(ExperimentError::InvalidSpec(
                "max_rounds must be positive".into(),
            ));
        }
        Ok(())
    }

    fn run_config(&self) -> RunConfig {
        RunConfig {
            max_rounds: self.max_rounds,
            record_trace: false,
        }
    }
}

/// How to schedule trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Rayon's global pool. Falls back to sequential execution without the
    /// `parallel` feature, as does `ParallelJobs`.
    #[default]
    Parallel,
    /// A dedicated pool with this many workers.
    ParallelJobs(usize),
}

/// One unit of work.
struct Task<'a> {
    size: usize,
    trial: u64,
    graph: Option<&'a Graph>,
}

struct Prepared {
    spec: ExperimentSpec,
    sizes: Vec<usize>,
    shared: Vec<Option<Graph>>,
}

fn prepare(spec: &ExperimentSpec) -> Result<Prepared, ExperimentError> {
    spec.validate()?;
    let mut sizes = spec.n_values.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let shared = sizes
        .iter()
        .map(|&size| {
            if spec.family.is_random() {
                Ok(None)
            } else {
                spec.family.instance(size).build(0).map(Some)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    // Surface parameter errors (e.g. p > 1) before spawning any work.
    if let Family::ErdosRenyi(p) = spec.family {
        if !(0.0..=1.0).contains(&p) {
            return Err(GraphError::InvalidParameter(format!(
                "edge probability {p} not in [0, 1]"
            ))
            .into());
        }
    }
    Ok(Prepared {
        spec: spec.clone(),
        sizes,
        shared,
    })
}

impl Prepared {
    fn tasks(&self) -> Vec<Task<'_>> {
        self.sizes
            .iter()
            .zip(&self.shared)
            .flat_map(|(&size, graph)| {
                (0..self.spec.trials).map(move |trial| Task {
                    size,
                    trial,
                    graph: graph.as_ref(),
                })
            })
            .collect()
    }

    fn execute(&self, task: &Task<'_>) -> TrialRecord {
        let seed = stable_mix(self.spec.master_seed, task.size as u64, task.trial);
        let instance = self.spec.family.instance(task.size);
        let owned;
        let graph = match task.graph {
            Some(g) => g,
            None => {
                owned = instance
                    .build(seed)
                    .expect("family parameters validated in prepare");
                &owned
            }
        };
        let result = run(graph, &self.spec.policy, seed, self.spec.run_config());
        let (family, param) = instance.describe();
        record(&self.spec.policy, family, param, task.trial, seed, &result)
    }
}

/// Builds the CSV record for one finished run.
pub fn record(
    policy: &Policy,
    family: String,
    param: String,
    trial: u64,
    seed: u64,
    result: &RunResult,
) -> TrialRecord {
    TrialRecord {
        policy: policy.to_string(),
        graph: family,
        n: result.node_count(),
        param,
        trial,
        seed,
        rounds: result.rounds,
        terminated: result.terminated,
        total_beeps: result.total_beeps,
        beeps_per_node: result.beeps_per_node(),
        mis_size: result.mis.len(),
    }
}

fn sort_records(records: &mut [TrialRecord]) {
    records.sort_by_key(|r| (r.n, r.trial));
}

/// Runs every trial on the calling thread.
pub fn run_experiment_sequential(
    spec: &ExperimentSpec,
) -> Result<Vec<TrialRecord>, ExperimentError> {
    let prepared = prepare(spec)?;
    let mut records: Vec<TrialRecord> = prepared
        .tasks()
        .iter()
        .map(|t| prepared.execute(t))
        .collect();
    sort_records(&mut records);
    Ok(records)
}

/// Runs trials on rayon's global pool.
#[cfg(feature = "parallel")]
pub fn run_experiment_parallel(spec: &ExperimentSpec) -> Result<Vec<TrialRecord>, ExperimentError> {
    use rayon::prelude::*;

    let prepared = prepare(spec)?;
    let mut records: Vec<TrialRecord> = prepared
        .tasks()
        .par_iter()
        .map(|t| prepared.execute(t))
        .collect();
    sort_records(&mut records);
    Ok(records)
}

pub fn run_experiment(
    spec: &ExperimentSpec,
    execution: Execution,
) -> Result<Vec<TrialRecord>, ExperimentError> {
    match execution {
        Execution::Sequential => run_experiment_sequential(spec),
        #[cfg(feature = "parallel")]
        Execution::Parallel => run_experiment_parallel(spec),
        #[cfg(feature = "parallel")]
        Execution::ParallelJobs(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.max(1))
                .build()?;
            pool.install(|| run_experiment_parallel(spec))
        }
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel | Execution::ParallelJobs(_) => run_experiment_sequential(spec),
    }
}

/// Runs every policy on `clique_family(m)` for each `m`, with the same trial
/// seeds for every policy. Records are grouped by policy in the given order.
pub fn run_lowerbound(
    m_values: &[usize],
    policies: &[Policy],
    trials: u64,
    master_seed: u64,
    max_rounds: Option<u64>,
    execution: Execution,
) -> Result<Vec<TrialRecord>, ExperimentError> {
    if let Some(&m) = m_values.iter().find(|&&m| m < 2) {
        return Err(ExperimentError::InvalidSpec(format!(
            "clique family size m = {m}; need m >= 2"
        )));
    }
    if policies.is_empty() {
        return Err(ExperimentError::InvalidSpec("no policies given".into()));
    }
    let mut all = Vec::new();
    for policy in policies {
        let spec = ExperimentSpec {
            policy: *policy,
            family: Family::CliqueFamily,
            n_values: m_values.to_vec(),
            trials,
            master_seed,
            max_rounds,
        };
        all.extend(run_experiment(&spec, execution)?);
    }
    Ok(all)
}
