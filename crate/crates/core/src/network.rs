//! Multi-community social graph drawn from a stochastic block model.

use std::io::{self, BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Community sizes and per-community epidemic rates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommunitySpec {
    sizes: Vec<usize>,
    contact_rates: Vec<f64>,
    recovery_rates: Vec<f64>,
}

impl CommunitySpec {
    /// Rates are probabilities per step and may sit on the closed interval
    /// `[0, 1]`; the endpoints are useful degenerate cases.
    pub fn new(
        sizes: Vec<usize>,
        contact_rates: Vec<f64>,
        recovery_rates: Vec<f64>,
    ) -> Result<Self> {
        let m = sizes.len();
        if m == 0 {
            return Err(Error::domain("sizes", "at least one community required"));
        }
        if contact_rates.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: contact_rates.len(),
            });
        }
        if recovery_rates.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: recovery_rates.len(),
            });
        }
        if let Some(pos) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::domain(
                "sizes",
                format!("community {} is empty", pos + 1),
            ));
        }
        for (name, rates) in [
            ("contact_rates", &contact_rates),
            ("recovery_rates", &recovery_rates),
        ] {
            if let Some(bad) = rates.iter().find(|r| !(0.0..=1.0).contains(*r)) {
                return Err(Error::domain(name, format!("{bad} is not a probability")));
            }
        }
        Ok(Self {
            sizes,
            contact_rates,
            recovery_rates,
        })
    }

    pub fn community_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn contact_rate(&self, m: usize) -> f64 {
        self.contact_rates[m]
    }

    pub fn recovery_rate(&self, m: usize) -> f64 {
        self.recovery_rates[m]
    }

    pub fn contact_rates(&self) -> &[f64] {
        &self.contact_rates
    }

    pub fn recovery_rates(&self) -> &[f64] {
        &self.recovery_rates
    }

    /// Community labels for contiguous blocks in spec order.
    pub fn labels(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .enumerate()
            .flat_map(|(m, &size)| std::iter::repeat_n(m, size))
            .collect()
    }
}

/// Symmetric matrix of between-community connection probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct BlockProbabilityMatrix(Vec<Vec<f64>>);

impl BlockProbabilityMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        for row in &rows {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: row.len(),
                });
            }
        }
        for (a, row) in rows.iter().enumerate() {
            for (b, &v) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::domain(
                        "B",
                        format!("entry ({a}, {b}) = {v} is not a probability"),
                    ));
                }
                if v != rows[b][a] {
                    return Err(Error::domain("B", format!("not symmetric at ({a}, {b})")));
                }
            }
        }
        Ok(Self(rows))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.0[a][b]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.0
    }
}

impl TryFrom<Vec<Vec<f64>>> for BlockProbabilityMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<BlockProbabilityMatrix> for Vec<Vec<f64>> {
    fn from(b: BlockProbabilityMatrix) -> Self {
        b.0
    }
}

/// Undirected simple graph with a community label per node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommunityGraph {
    labels: Vec<usize>,
    community_count: usize,
    adjacency: Vec<Vec<usize>>,
    edges: usize,
}

impl CommunityGraph {
    /// Builds a graph from 0-based labels and an edge list. Duplicate edges
    /// collapse; self-loops are rejected.
    pub fn from_edges(
        labels: Vec<usize>,
        community_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let n = labels.len();
        if let Some(&bad) = labels.iter().find(|&&c| c >= community_count) {
            return Err(Error::domain(
                "labels",
                format!("community {} outside 1..={community_count}", bad + 1),
            ));
        }
        let mut adjacency = vec![Vec::new(); n];
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::domain(
                    "edges",
                    format!("edge ({a}, {b}) outside 0..{n}"),
                ));
            }
            if a == b {
                return Err(Error::domain("edges", format!("self-loop at node {a}")));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        let mut edges = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            edges += list.len();
        }
        Ok(Self {
            labels,
            community_count,
            adjacency,
            edges: edges / 2,
        })
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn community_count(&self) -> usize {
        self.community_count
    }

    /// 0-based community of node `i`.
    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Sorted neighbour list of `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn are_adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    pub fn community_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.community_count];
        for &c in &self.labels {
            sizes[c] += 1;
        }
        sizes
    }

    /// Nodes of community `m`, in ascending order.
    pub fn members(&self, m: usize) -> Vec<usize> {
        (0..self.node_count())
            .filter(|&i| self.labels[i] == m)
            .collect()
    }

    /// Each undirected edge once, as `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    /// `i j` per line, 0-based.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (i, j) in self.edges() {
            writeln!(out, "{i} {j}")?;
        }
        Ok(())
    }

    /// `i c_i` per line, node 0-based and community 1-based.
    pub fn write_labels<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (i, c) in self.labels.iter().enumerate() {
            writeln!(out, "{i} {}", c + 1)?;
        }
        Ok(())
    }

    /// Reads the pair written by [`write_labels`](Self::write_labels) and
    /// [`write_edge_list`](Self::write_edge_list).
    pub fn read<L: BufRead, E: BufRead>(labels: L, edges: E) -> Result<Self> {
        let mut pairs = Vec::new();
        for (idx, line) in labels.lines().enumerate() {
            let line = line.map_err(|e| parse_err(idx, e.to_string()))?;
            if let Some((i, c)) = parse_pair(idx, &line)? {
                if c == 0 {
                    return Err(parse_err(idx, "community labels are 1-based".into()));
                }
                pairs.push((i, c - 1));
            }
        }
        pairs.sort_unstable();
        for (expect, &(i, _)) in pairs.iter().enumerate() {
            if i != expect {
                return Err(Error::domain(
                    "labels",
                    format!("node {expect} missing or duplicated"),
                ));
            }
        }
        let labels: Vec<usize> = pairs.into_iter().map(|(_, c)| c).collect();
        let community_count = labels.iter().max().map_or(0, |&c| c + 1);

        let mut list = Vec::new();
        for (idx, line) in edges.lines().enumerate() {
            let line = line.map_err(|e| parse_err(idx, e.to_string()))?;
            if let Some(pair) = parse_pair(idx, &line)? {
                list.push(pair);
            }
        }
        Self::from_edges(labels, community_count, list)
    }
}

fn parse_err(idx: usize, message: String) -> Error {
    Error::Parse {
        line: idx + 1,
        message,
    }
}

fn parse_pair(idx: usize, line: &str) -> Result<Option<(usize, usize)>> {
    let line = line.trim();
    if line.is_empty() || line.starts_with('#') {
        return Ok(None);
    }
    let mut fields = line.split_whitespace();
    let mut next = || -> Result<usize> {
        let f = fields
            .next()
            .ok_or_else(|| parse_err(idx, "expected two integers".into()))?;
        f.parse()
            .map_err(|_| parse_err(idx, format!("`{f}` is not a nonnegative integer")))
    };
    let a = next()?;
    let b = next()?;
    Ok(Some((a, b)))
}

/// Draws each unordered pair `{i, j}` independently with probability
/// `B[c_i][c_j]`. Nodes are labelled in contiguous blocks in `spec` order.
pub fn generate_sbm<R: Rng + ?Sized>(
    rng: &mut R,
    spec: &CommunitySpec,
    b: &BlockProbabilityMatrix,
) -> Result<CommunityGraph> {
    if b.dim() != spec.community_count() {
        return Err(Error::DimensionMismatch {
            expected: spec.community_count(),
            found: b.dim(),
        });
    }
    let labels = spec.labels();
    let n = labels.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < b.get(labels[i], labels[j]) {
                edges.push((i, j));
            }
        }
    }
    CommunityGraph::from_edges(labels, spec.community_count(), edges)
}

/// `2|E| / n`.
pub fn average_degree(g: &CommunityGraph) -> f64 {
    if g.node_count() == 0 {
        return 0.0;
    }
    2.0 * g.edge_count() as f64 / g.node_count() as f64
}

/// Rescales a mass-action contact rate to a per-neighbour probability:
/// `beta * n / avg_degree`.
pub fn offset_contact_rate(beta: f64, n: usize, avg_degree: f64) -> Result<f64> {
    if !(avg_degree > 0.0) {
        return Err(Error::domain(
            "avg_degree",
            format!("{avg_degree} must be > 0"),
        ));
    }
    if beta < 0.0 {
        return Err(Error::domain("beta", format!("{beta} must be >= 0")));
    }
    let rate = beta * n as f64 / avg_degree;
    if rate >= 1.0 {
        return Err(Error::domain(
            "offset contact rate",
            format!("{rate} >= 1; rescale beta"),
        ));
    }
    Ok(rate)
}
