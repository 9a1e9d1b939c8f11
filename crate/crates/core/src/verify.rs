//! Maximal-independent-set checks, independent of the simulator.

use thiserror::Error;

use crate::graph::Graph;

/// Largest graph [`enumerate_mis`] accepts.
pub const ENUMERATION_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("graph has {0} nodes; enumeration is limited to {ENUMERATION_LIMIT}")]
    TooLarge(usize),
    #[error("line {line}: expected a node index, found {text:?}")]
    Parse { line: usize, text: String },
}

/// Parses a node set file: one index per line, blank lines ignored.
pub fn parse_node_set(text: &str) -> Result<Vec<usize>, VerifyError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse().map_err(|_| VerifyError::Parse {
                line: i + 1,
                text: l.to_string(),
            })
        })
        .collect()
}

/// Inverse of [`parse_node_set`].
pub fn write_node_set(set: &[usize]) -> String {
    set.iter().map(|v| format!("{v}\n")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Witness {
    /// Both endpoints are in the candidate set.
    Edge(usize, usize),
    /// Outside the set with no neighbour inside it.
    Addable(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub independent: bool,
    pub maximal: bool,
    /// First violation found; independence is checked before maximality.
    pub witness: Option<Witness>,
}

impl VerifyReport {
    pub fn is_mis(&self) -> bool {
        self.independent && self.maximal
    }
}

/// Checks that `candidate` is independent and maximal in `graph`.
/// Duplicate entries in `candidate` are ignored.
///
/// When both properties fail the witness reports the independence violation.
pub fn check_mis(graph: &Graph, candidate: &[usize]) -> Result<VerifyReport, VerifyError> {
    let n = graph.node_count();
    let mut member = vec![false; n];
    for &v in candidate {
        if v >= n {
            return Err(VerifyError::InvalidParameter(format!(
                "node {v} out of range for {n} nodes"
            )));
        }
        member[v] = true;
    }

    let conflict = (0..n).filter(|&u| member[u]).find_map(|u| {
        graph
            .neighbours(u)
            .iter()
            .find(|&&v| v > u && member[v])
            .map(|&v| Witness::Edge(u, v))
    });
    let addable = (0..n)
        .find(|&v| !member[v] && !graph.neighbours(v).iter().any(|&u| member[u]))
        .map(Witness::Addable);

    Ok(VerifyReport {
        independent: conflict.is_none(),
        maximal: addable.is_none(),
        witness: conflict.or(addable),
    })
}

/// Every maximal independent set of a graph with at most
/// [`ENUMERATION_LIMIT`] nodes, each sorted, the family in lexicographic
/// order.
pub fn enumerate_mis(graph: &Graph) -> Result<Vec<Vec<usize>>, VerifyError> {
    let n = graph.node_count();
    if n > ENUMERATION_LIMIT {
        return Err(VerifyError::TooLarge(n));
    }
    let masks: Vec<u32> = (0..n)
        .map(|v| graph.neighbours(v).iter().fold(0u32, |m, &u| m | (1 << u)))
        .collect();

    let mut family = Vec::new();
    for set in 0u32..(1u32 << n) {
        let independent = (0..n).all(|v| set & (1 << v) == 0 || masks[v] & set == 0);
        if !independent {
            continue;
        }
        let maximal = (0..n).all(|v| set & (1 << v) != 0 || masks[v] & set != 0);
        if maximal {
            family.push((0..n).filter(|&v| set & (1 << v) != 0).collect::<Vec<_>>());
        }
    }
    family.sort();
    Ok(family)
}
