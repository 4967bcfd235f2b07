//! Simple undirected graphs and the subset counting primitives used by
//! every objective in the crate.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// An immutable simple undirected graph on vertices `0..n`.
///
/// Adjacency lists are sorted and symmetric. Labels, when present, are the
/// tokens the graph was read from and are only used for output.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
    labels: Option<Vec<String>>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n())
            .field("m", &self.m())
            .finish()
    }
}

impl Graph {
    /// Builds a graph from an edge iterator. Duplicate edges collapse;
    /// self-loops and out-of-range endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adjacency = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(invalid(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if u == v {
                return Err(invalid(format!("self-loop at vertex {u}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        let mut edge_count = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            edge_count += list.len();
        }
        Ok(Self {
            adjacency,
            edge_count: edge_count / 2,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(invalid(format!(
                "{} labels for {} vertices",
                labels.len(),
                self.n()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn m(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        self.adjacency.iter().map(Vec::len)
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Display label of a vertex; falls back to the internal id.
    pub fn label(&self, v: usize) -> String {
        match &self.labels {
            Some(labels) => labels[v].clone(),
            None => v.to_string(),
        }
    }

    pub fn all_vertices(&self) -> VertexSet {
        VertexSet((0..self.n()).collect())
    }

    fn check_set(&self, s: &VertexSet) -> Result<()> {
        match s.0.last() {
            Some(&v) if v >= self.n() => Err(invalid(format!(
                "vertex {v} out of range for n = {}",
                self.n()
            ))),
            _ => Ok(()),
        }
    }

    /// Number of edges with both endpoints in `s`.
    pub fn induced_edge_count(&self, s: &VertexSet) -> Result<usize> {
        self.check_set(s)?;
        let mask = s.mask(self.n());
        let twice: usize = s
            .iter()
            .map(|v| self.adjacency[v].iter().filter(|&&u| mask[u]).count())
            .sum();
        Ok(twice / 2)
    }

    /// Number of edges leaving `s`.
    pub fn cut_size(&self, s: &VertexSet) -> Result<usize> {
        let inside = self.induced_edge_count(s)?;
        let volume: usize = s.iter().map(|v| self.degree(v)).sum();
        Ok(volume - 2 * inside)
    }

    pub fn complement(&self) -> Graph {
        let n = self.n();
        let mut adjacency = Vec::with_capacity(n);
        let mut edge_count = 0;
        for (u, list) in self.adjacency.iter().enumerate() {
            let mut others = Vec::with_capacity(n - 1 - list.len());
            let mut present = list.iter().peekable();
            for v in 0..n {
                if present.peek() == Some(&&v) {
                    present.next();
                } else if v != u {
                    others.push(v);
                }
            }
            edge_count += others.len();
            adjacency.push(others);
        }
        Graph {
            adjacency,
            edge_count: edge_count / 2,
            labels: self.labels.clone(),
        }
    }

    /// `Some(d)` when every vertex has degree `d`.
    pub fn regular_degree(&self) -> Option<usize> {
        let mut degrees = self.degrees();
        let first = degrees.next()?;
        degrees.all(|d| d == first).then_some(first)
    }

    /// Serializes to the edge-list text format, using labels when present.
    /// Isolated vertices are written as single-token lines.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for v in 0..self.n() {
            if self.degree(v) == 0 {
                out.push_str(&self.label(v));
                out.push('\n');
            }
        }
        for (u, v) in self.edges() {
            out.push_str(&self.label(u));
            out.push(' ');
            out.push_str(&self.label(v));
            out.push('\n');
        }
        out
    }
}

/// A canonical (sorted, duplicate-free) set of vertex ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Vec<usize>", into = "Vec<usize>")]
pub struct VertexSet(Vec<usize>);

impl From<Vec<usize>> for VertexSet {
    fn from(members: Vec<usize>) -> Self {
        Self::new(members)
    }
}

impl From<VertexSet> for Vec<usize> {
    fn from(set: VertexSet) -> Self {
        set.0
    }
}

impl VertexSet {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self(members)
    }

    pub fn singleton(v: usize) -> Self {
        Self(vec![v])
    }

    /// Members of a bitmask over vertices `0..64`.
    pub fn from_mask(mask: u64) -> Self {
        Self((0..64).filter(|&v| mask >> v & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &v in &self.0 {
            mask[v] = true;
        }
        mask
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// Parses the whitespace-delimited edge-list format.
///
/// Lines starting with `#` and blank lines are skipped. A two-token line is
/// an edge; a one-token line declares a vertex, which is how isolated
/// vertices are written. Without `one_indexed`, tokens are arbitrary labels
/// compacted to ids in first-seen order. With `one_indexed`, tokens must be
/// positive integers and token `t` becomes vertex `t - 1`.
pub fn parse_edge_list(text: &str, one_indexed: bool) -> Result<Graph> {
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut max_index = 0usize;
    let mut edges = Vec::new();

    let mut resolve = |token: &str, line: usize| -> Result<usize> {
        if one_indexed {
            let t: usize = token.parse().map_err(|_| Error::Parse {
                line,
                message: format!("expected a positive integer vertex, found {token:?}"),
            })?;
            if t == 0 {
                return Err(Error::Parse {
                    line,
                    message: "vertex 0 in a one-indexed edge list".into(),
                });
            }
            max_index = max_index.max(t);
            Ok(t - 1)
        } else {
            let next = labels.len();
            let id = *ids.entry(token.to_string()).or_insert(next);
            if id == next {
                labels.push(token.to_string());
            }
            Ok(id)
        }
    };

    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        match tokens.as_slice() {
            [single] => {
                resolve(single, line)?;
            }
            [a, b] => {
                let u = resolve(a, line)?;
                let v = resolve(b, line)?;
                if u == v {
                    return Err(Error::Parse {
                        line,
                        message: format!("self-loop on vertex {a}"),
                    });
                }
                edges.push((u, v));
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected one or two vertex tokens, found {}", tokens.len()),
                })
            }
        }
    }

    if one_indexed {
        let labels = (1..=max_index).map(|t| t.to_string()).collect();
        Graph::from_edges(max_index, edges)?.with_labels(labels)
    } else {
        Graph::from_edges(labels.len(), edges)?.with_labels(labels)
    }
}
