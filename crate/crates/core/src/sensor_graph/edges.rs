use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::layout::{TaxelLayout, TAXEL_COUNT};
use crate::error::{Error, Result};

const DEFAULT_MANUAL_EDGES: &str = include_str!("../../data/manual_edges.txt");

/// Node of the manual graph that sits in the middle of the sensor (electrode 24).
pub const CENTER_NODE: usize = 23;
const CENTER_DEGREE: usize = 6;
const MAX_OTHER_DEGREE: usize = 4;

/// A set of ordered node pairs. Undirected sets store both orientations of
/// every edge. Self-loops are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSet {
    edges: Vec<(usize, usize)>,
    directed: bool,
}

impl EdgeSet {
    pub fn empty(directed: bool) -> Self {
        Self {
            edges: Vec::new(),
            directed,
        }
    }

    /// Directed edges in the given order. Rejects self-loops and duplicates.
    pub fn new_directed(edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &(s, d) in &edges {
            if s == d {
                return Err(Error::InvalidArgument(format!("self-loop on node {s}")));
            }
            if !seen.insert((s, d)) {
                return Err(Error::InvalidArgument(format!("duplicate edge {s} -> {d}")));
            }
        }
        Ok(Self {
            edges,
            directed: true,
        })
    }

    /// Closes `pairs` under reversal and stores them in sorted order.
    /// Repeated pairs (in either orientation) collapse into one edge.
    pub fn new_undirected(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (s, d) in pairs {
            if s == d {
                return Err(Error::InvalidArgument(format!("self-loop on node {s}")));
            }
            set.insert((s, d));
            set.insert((d, s));
        }
        Ok(Self {
            edges: set.into_iter().collect(),
            directed: false,
        })
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Largest node index referenced plus one, or 0 for an empty set.
    pub fn min_node_count(&self) -> usize {
        self.edges
            .iter()
            .map(|&(s, d)| s.max(d) + 1)
            .max()
            .unwrap_or(0)
    }

    /// Number of stored edges leaving `node`. For undirected sets this is the
    /// ordinary vertex degree.
    pub fn out_degree(&self, node: usize) -> usize {
        self.edges.iter().filter(|&&(s, _)| s == node).count()
    }

    /// Each undirected edge once as `(lo, hi)`; for directed sets, every edge.
    pub fn drawable_segments(&self) -> Vec<(usize, usize)> {
        if self.directed {
            self.edges.clone()
        } else {
            self.edges.iter().copied().filter(|&(s, d)| s < d).collect()
        }
    }

    /// Applies the node relabeling `node -> perm[node]`.
    pub fn relabeled(&self, perm: &[usize]) -> EdgeSet {
        let edges = self.edges.iter().map(|&(s, d)| (perm[s], perm[d]));
        if self.directed {
            EdgeSet {
                edges: edges.collect(),
                directed: true,
            }
        } else {
            EdgeSet {
                edges: edges.collect::<BTreeSet<_>>().into_iter().collect(),
                directed: false,
            }
        }
    }

    /// Stored edges as an order-independent set.
    pub fn as_set(&self) -> BTreeSet<(usize, usize)> {
        self.edges.iter().copied().collect()
    }

    /// Canonical text form: a header line then one sorted `src dst` line per
    /// stored edge.
    pub fn to_canonical_text(&self) -> String {
        let mut out = String::new();
        let kind = if self.directed { "directed" } else { "undirected" };
        let _ = writeln!(out, "# {kind}");
        let mut sorted = self.edges.clone();
        sorted.sort_unstable();
        for (s, d) in sorted {
            let _ = writeln!(out, "{s} {d}");
        }
        out
    }

    /// SHA-256 of the canonical text, hex encoded.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_canonical_text().as_bytes()))
    }
}

/// For each node, directed edges to its `k` nearest other nodes by Euclidean
/// distance. Ties go to the lower node index.
pub fn knn_edges(layout: &TaxelLayout, k: usize) -> Result<EdgeSet> {
    if !(1..TAXEL_COUNT).contains(&k) {
        return Err(Error::InvalidArgument(format!(
            "k must be in [1, {}], got {k}",
            TAXEL_COUNT - 1
        )));
    }
    let pos = layout.positions();
    let mut edges = Vec::with_capacity(TAXEL_COUNT * k);
    for (n, p) in pos.iter().enumerate() {
        let mut others: Vec<(f64, usize)> = pos
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != n)
            .map(|(m, q)| (p.distance(q), m))
            .collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        edges.extend(others.iter().take(k).map(|&(_, m)| (n, m)));
    }
    EdgeSet::new_directed(edges)
}

/// Parses the plain-text edge-list format: one `src dst` pair per line,
/// `#` starts a comment. Undirected lists are closed under reversal.
pub fn parse_edge_list(text: &str, source_name: &str, directed: bool) -> Result<EdgeSet> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        source_name: source_name.to_string(),
        line,
        msg,
    };

    let mut pairs = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(parse_err(
                line_no,
                format!("expected `src dst`, found {} fields", fields.len()),
            ));
        }
        let mut idx = [0usize; 2];
        for (slot, field) in idx.iter_mut().zip(&fields) {
            *slot = field
                .parse()
                .map_err(|_| parse_err(line_no, format!("`{field}` is not a node index")))?;
            if *slot >= TAXEL_COUNT {
                return Err(parse_err(
                    line_no,
                    format!("node {} out of range [0, {TAXEL_COUNT})", *slot),
                ));
            }
        }
        let [s, d] = idx;
        if s == d {
            return Err(parse_err(line_no, format!("self-loop on node {s}")));
        }
        if directed && !seen.insert((s, d)) {
            return Err(parse_err(line_no, format!("duplicate edge {s} -> {d}")));
        }
        pairs.push((s, d));
    }

    if directed {
        EdgeSet::new_directed(pairs)
    } else {
        EdgeSet::new_undirected(pairs)
    }
}

/// Checks the degree profile expected of a manual graph: the center node has
/// six neighbors, every other node between one and four.
pub fn validate_manual_degrees(edges: &EdgeSet) -> Result<()> {
    for node in 0..TAXEL_COUNT {
        let degree = edges.out_degree(node);
        if node == CENTER_NODE {
            if degree != CENTER_DEGREE {
                return Err(Error::Validation(format!(
                    "node {node} (electrode {}) has degree {degree}, expected {CENTER_DEGREE}",
                    node + 1
                )));
            }
        } else if !(1..=MAX_OTHER_DEGREE).contains(&degree) {
            return Err(Error::Validation(format!(
                "node {node} (electrode {}) has degree {degree}, expected 1 to {MAX_OTHER_DEGREE}",
                node + 1
            )));
        }
    }
    Ok(())
}

/// The undirected hand-specified graph: the shipped default, or the list in
/// `config_path` when given. Either way the degree profile is validated.
pub fn manual_edges(config_path: Option<&Path>) -> Result<EdgeSet> {
    let edges = match config_path {
        None => parse_edge_list(DEFAULT_MANUAL_EDGES, "<default manual edges>", false)?,
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_edge_list(&text, &path.display().to_string(), false)?
        }
    };
    validate_manual_degrees(&edges)?;
    Ok(edges)
}
