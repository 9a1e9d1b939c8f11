//! Undirected simple graphs over dense node indices, the generators used by
//! the experiments, and the edge-list text format.
//!
//! The edge-list format is line oriented:
//!
//! ```text
//! n m
//! u v
//! ...
//! ```
//!
//! The header gives the node count and the number of edge lines that follow.
//! Every edge line holds two distinct indices below `n`. An edge may appear at
//! most once in either orientation.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("line {line}: {kind}")]
    Parse { line: usize, kind: ParseErrorKind },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("missing header line")]
    MissingHeader,
    #[error("malformed line {0:?}")]
    Malformed(String),
    #[error("node index {index} out of range for {node_count} nodes")]
    OutOfRange { index: usize, node_count: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("expected {expected} edge lines, found {found}")]
    EdgeCountMismatch { expected: usize, found: usize },
}

/// An immutable undirected simple graph.
///
/// Adjacency lists are sorted and strictly increasing, symmetric, and never
/// contain the owning node.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Graph with `node_count` nodes and no edges.
    pub fn empty(node_count: usize) -> Self {
        Self {
            adjacency: vec![Vec::new(); node_count],
        }
    }

    /// Builds a graph from an edge list, rejecting self-loops, duplicates and
    /// out-of-range indices.
    pub fn from_edges(
        node_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let mut builder = GraphBuilder::new(node_count);
        for (u, v) in edges {
            builder
                .add_edge(u, v)
                .map_err(|kind| GraphError::InvalidParameter(kind.to_string()))?;
        }
        Ok(builder.build())
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Sorted neighbours of `v`.
    ///
    /// Panics if `v` is out of range.
    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.node_count() && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` pairs with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, nbrs)| {
            nbrs.iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Checks the structural invariants. Generators and the parser only ever
    /// produce valid graphs; this exists for tests and for callers who build
    /// graphs by other means.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.node_count();
        for (v, nbrs) in self.adjacency.iter().enumerate() {
            for w in nbrs.windows(2) {
                if w[0] >= w[1] {
                    return Err(format!("adjacency of {v} not strictly increasing"));
                }
            }
            for &u in nbrs {
                if u >= n {
                    return Err(format!("neighbour {u} of {v} out of range"));
                }
                if u == v {
                    return Err(format!("self-loop on {v}"));
                }
                if self.adjacency[u].binary_search(&v).is_err() {
                    return Err(format!("edge ({v}, {u}) is not symmetric"));
                }
            }
        }
        Ok(())
    }

    /// Number of connected components.
    pub fn component_count(&self) -> usize {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut stack = Vec::new();
        let mut components = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &u in &self.adjacency[v] {
                    if !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
        }
        components
    }
}

struct GraphBuilder {
    adjacency: Vec<Vec<usize>>,
}

impl GraphBuilder {
    fn new(node_count: usize) -> Self {
        Self {
            adjacency: vec![Vec::new(); node_count],
        }
    }

    fn add_edge(&mut self, u: usize, v: usize) -> Result<(), ParseErrorKind> {
        let node_count = self.adjacency.len();
        for index in [u, v] {
            if index >= node_count {
                return Err(ParseErrorKind::OutOfRange { index, node_count });
            }
        }
        if u == v {
            return Err(ParseErrorKind::SelfLoop(u));
        }
        match self.adjacency[u].binary_search(&v) {
            Ok(_) => return Err(ParseErrorKind::DuplicateEdge(u, v)),
            Err(pos) => self.adjacency[u].insert(pos, v),
        }
        let pos = self.adjacency[v].binary_search(&u).unwrap_err();
        self.adjacency[v].insert(pos, u);
        Ok(())
    }

    /// Appends edges known to arrive in increasing order for both endpoints.
    fn push_sorted(&mut self, u: usize, v: usize) {
        debug_assert!(u < v);
        self.adjacency[u].push(v);
        self.adjacency[v].push(u);
    }

    fn build(self) -> Graph {
        Graph {
            adjacency: self.adjacency,
        }
    }
}

fn require_positive(name: &str, value: usize) -> Result<(), GraphError> {
    if value == 0 {
        Err(GraphError::InvalidParameter(format!(
            "{name} must be at least 1"
        )))
    } else {
        Ok(())
    }
}

/// The complete graph `K_d`.
pub fn complete_graph(d: usize) -> Result<Graph, GraphError> {
    require_positive("d", d)?;
    let mut builder = GraphBuilder::new(d);
    for u in 0..d {
        for v in u + 1..d {
            builder.push_sorted(u, v);
        }
    }
    Ok(builder.build())
}

/// `m` disjoint copies of `K_d` for every `d` in `1..=m`.
///
/// Copies are laid out consecutively: all copies of `K_1`, then all copies of
/// `K_2`, and so on. The result has `m * m(m+1)/2` nodes.
pub fn clique_family(m: usize) -> Result<Graph, GraphError> {
    require_positive("m", m)?;
    let node_count = m * m * (m + 1) / 2;
    let mut builder = GraphBuilder::new(node_count);
    let mut base = 0;
    for d in 1..=m {
        for _copy in 0..m {
            for u in 0..d {
                for v in u + 1..d {
                    builder.push_sorted(base + u, base + v);
                }
            }
            base += d;
        }
    }
    debug_assert_eq!(base, node_count);
    Ok(builder.build())
}

/// Erdős–Rényi `G(n, p)`.
///
/// Pairs are visited in lexicographic order `(0,1), (0,2), ..., (n-2,n-1)` and
/// each consumes exactly one draw from a ChaCha8 stream seeded with `seed`.
pub fn erdos_renyi(n: usize, p_edge: f64, seed: u64) -> Result<Graph, GraphError> {
    if !(0.0..=1.0).contains(&p_edge) {
        return Err(GraphError::InvalidParameter(format!(
            "edge probability {p_edge} not in [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut builder = GraphBuilder::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p_edge) {
                builder.push_sorted(u, v);
            }
        }
    }
    Ok(builder.build())
}

/// `rows x cols` grid with 4-neighbour adjacency. Node `(r, c)` has index
/// `r * cols + c`.
pub fn grid_graph(rows: usize, cols: usize) -> Result<Graph, GraphError> {
    require_positive("rows", rows)?;
    require_positive("cols", cols)?;
    let mut builder = GraphBuilder::new(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                builder.push_sorted(v, v + 1);
            }
            if r + 1 < rows {
                builder.push_sorted(v, v + cols);
            }
        }
    }
    // Row-major visiting order pushes v-cols, v-1, v+1, v+cols onto v's list.
    Ok(builder.build())
}

/// Path `0 - 1 - ... - (n-1)`.
pub fn path_graph(n: usize) -> Result<Graph, GraphError> {
    require_positive("n", n)?;
    let mut builder = GraphBuilder::new(n);
    for v in 1..n {
        builder.push_sorted(v - 1, v);
    }
    Ok(builder.build())
}

/// Cycle on `n >= 3` nodes.
pub fn cycle_graph(n: usize) -> Result<Graph, GraphError> {
    if n < 3 {
        return Err(GraphError::InvalidParameter(format!(
            "cycle needs at least 3 nodes, got {n}"
        )));
    }
    let edges = (0..n).map(|v| (v, (v + 1) % n));
    Graph::from_edges(n, edges)
}

fn parse_pair(line: &str, line_no: usize) -> Result<(usize, usize), GraphError> {
    let malformed = || GraphError::Parse {
        line: line_no,
        kind: ParseErrorKind::Malformed(line.to_string()),
    };
    let mut fields = line.split_ascii_whitespace();
    let a = fields.next().ok_or_else(malformed)?;
    let b = fields.next().ok_or_else(malformed)?;
    if fields.next().is_some() {
        return Err(malformed());
    }
    let a = a.parse::<usize>().map_err(|_| malformed())?;
    let b = b.parse::<usize>().map_err(|_| malformed())?;
    Ok((a, b))
}

/// Parses the edge-list text format. Line numbers in errors are 1-based.
pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let (header_no, header) =
        lines
            .by_ref()
            .find(|(_, l)| !l.trim().is_empty())
            .ok_or(GraphError::Parse {
                line: 1,
                kind: ParseErrorKind::MissingHeader,
            })?;
    let (node_count, edge_count) = parse_pair(header, header_no)?;

    let mut builder = GraphBuilder::new(node_count);
    let mut found = 0;
    let mut last_line = header_no;
    for (line_no, line) in lines {
        last_line = line_no;
        if line.trim().is_empty() {
            continue;
        }
        let (u, v) = parse_pair(line, line_no)?;
        found += 1;
        if found > edge_count {
            return Err(GraphError::Parse {
                line: line_no,
                kind: ParseErrorKind::EdgeCountMismatch {
                    expected: edge_count,
                    found,
                },
            });
        }
        builder.add_edge(u, v).map_err(|kind| GraphError::Parse {
            line: line_no,
            kind,
        })?;
    }
    if found != edge_count {
        return Err(GraphError::Parse {
            line: last_line,
            kind: ParseErrorKind::EdgeCountMismatch {
                expected: edge_count,
                found,
            },
        });
    }
    Ok(builder.build())
}

/// Writes `g` in edge-list format, edges in lexicographic order, LF endings.
pub fn write_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", g.node_count(), g.edge_count());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}
