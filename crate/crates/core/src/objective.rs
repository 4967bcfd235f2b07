//! Scalar objectives over vertex subsets and partitions.
//!
//! For a nonempty subset `S` the cluster contribution is
//! `c(S) = (2|E(S)| - |E(S, V\S)|) / |S| = (4|E(S)| - vol(S)) / |S|`,
//! and the modularity density of a partition is the sum of its clusters'
//! contributions. Pricing works against a dual vector `lambda` through
//! `g(S) = c(S) - lambda(S)`; a positive value marks a violated dual
//! constraint. Note `c(S)` is twice the `f_{1/2}` density of the
//! dense-subgraph literature.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::{Graph, VertexSet};

/// Disjoint nonempty clusters covering every vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    clusters: Vec<VertexSet>,
    cluster_of: Vec<usize>,
}

impl Partition {
    pub fn new(n: usize, clusters: Vec<VertexSet>) -> Result<Self> {
        let mut cluster_of = vec![usize::MAX; n];
        for (index, cluster) in clusters.iter().enumerate() {
            if cluster.is_empty() {
                return Err(invalid(format!("cluster {index} is empty")));
            }
            for v in cluster.iter() {
                if v >= n {
                    return Err(invalid(format!("vertex {v} out of range for n = {n}")));
                }
                if cluster_of[v] != usize::MAX {
                    return Err(invalid(format!("vertex {v} appears in two clusters")));
                }
                cluster_of[v] = index;
            }
        }
        if let Some(v) = cluster_of.iter().position(|&c| c == usize::MAX) {
            return Err(invalid(format!("vertex {v} is not covered")));
        }
        Ok(Self {
            clusters,
            cluster_of,
        })
    }

    /// Builds the partition encoded by a cluster-label vector.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        let count = labels.iter().max().map_or(0, |&c| c + 1);
        let mut members = vec![Vec::new(); count];
        for (v, &c) in labels.iter().enumerate() {
            members[c].push(v);
        }
        let clusters = members
            .into_iter()
            .filter(|m| !m.is_empty())
            .map(VertexSet::new)
            .collect();
        Self::new(labels.len(), clusters)
    }

    pub fn clusters(&self) -> &[VertexSet] {
        &self.clusters
    }

    pub fn cluster_of(&self, v: usize) -> usize {
        self.cluster_of[v]
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn n(&self) -> usize {
        self.cluster_of.len()
    }

    /// Same clusters, ordered by smallest member.
    pub fn canonical(&self) -> Self {
        let mut clusters = self.clusters.clone();
        clusters.sort_by_key(|c| c.members()[0]);
        Self::new(self.n(), clusters).expect("reordering keeps validity")
    }
}

/// Per-vertex dual values, one per DP row of the master problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DualSolution(Vec<f64>);

impl DualSolution {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().position(|x| !x.is_finite()) {
            return Err(invalid(format!("dual value for vertex {v} is not finite")));
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self(vec![value; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn sum_over(&self, s: &VertexSet) -> f64 {
        s.iter().map(|v| self.0[v]).sum()
    }
}

impl std::ops::Index<usize> for DualSolution {
    type Output = f64;

    fn index(&self, v: usize) -> &f64 {
        &self.0[v]
    }
}

fn check_duals(g: &Graph, lam: &DualSolution) -> Result<()> {
    if lam.len() != g.n() {
        return Err(invalid(format!(
            "dual vector has length {} for n = {}",
            lam.len(),
            g.n()
        )));
    }
    Ok(())
}

fn check_weight(name: &str, w: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&w) {
        return Err(invalid(format!("{name} = {w} outside [0, 1]")));
    }
    Ok(())
}

/// `4|E(S)| - vol(S)`, the integer numerator of `c(S)`.
pub fn contribution_numerator(g: &Graph, s: &VertexSet) -> Result<i64> {
    let inside = g.induced_edge_count(s)? as i64;
    let volume: i64 = s.iter().map(|v| g.degree(v) as i64).sum();
    Ok(4 * inside - volume)
}

pub fn cluster_contribution(g: &Graph, s: &VertexSet) -> Result<f64> {
    if s.is_empty() {
        return Err(invalid("cluster contribution of an empty set"));
    }
    let value = contribution_numerator(g, s)? as f64 / s.len() as f64;
    debug_assert!({
        let inside = g.induced_edge_count(s)? as f64;
        let cut = g.cut_size(s)? as f64;
        ((2.0 * inside - cut) / s.len() as f64 - value).abs() <= 1e-12
    });
    Ok(value)
}

pub fn modularity_density(g: &Graph, p: &Partition) -> Result<f64> {
    if p.n() != g.n() {
        return Err(invalid(format!(
            "partition covers {} vertices, graph has {}",
            p.n(),
            g.n()
        )));
    }
    p.clusters()
        .iter()
        .map(|c| cluster_contribution(g, c))
        .sum()
}

/// `g(S) = c(S) - lambda(S)`.
pub fn pricing_objective(g: &Graph, s: &VertexSet, lam: &DualSolution) -> Result<f64> {
    check_duals(g, lam)?;
    Ok(cluster_contribution(g, s)? - lam.sum_over(s))
}

/// `g_p(S) = p c(S) - (1 - p) lambda(S)`.
pub fn blended_objective(g: &Graph, s: &VertexSet, lam: &DualSolution, p: f64) -> Result<f64> {
    check_weight("p", p)?;
    check_duals(g, lam)?;
    Ok(p * cluster_contribution(g, s)? - (1.0 - p) * lam.sum_over(s))
}

/// `|S| * g_p(S)`: the part of the blended objective that depends on which
/// vertex is removed during peeling.
pub fn blended_numerator(g: &Graph, s: &VertexSet, lam: &DualSolution, p: f64) -> Result<f64> {
    check_weight("p", p)?;
    check_duals(g, lam)?;
    let inside = g.induced_edge_count(s)? as f64;
    let cut = g.cut_size(s)? as f64;
    Ok(p * (2.0 * inside - cut) - (1.0 - p) * s.len() as f64 * lam.sum_over(s))
}

/// The two per-vertex removal scores and their blend.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VertexContribution {
    /// Share of `v` in the summed form of the blended numerator.
    pub sum: f64,
    /// Drop of the blended numerator when `v` is removed, up to a term
    /// common to all vertices.
    pub diff: f64,
    /// `q * sum + (1 - q) * diff`.
    pub blended: f64,
}

pub fn contribution_parts(
    inner_degree: usize,
    degree: usize,
    set_size: usize,
    lambda_v: f64,
    p: f64,
    q: f64,
) -> VertexContribution {
    let inner = inner_degree as f64;
    let outer = (degree - inner_degree) as f64;
    let size = set_size as f64;
    let sum = p * (inner - outer) - (1.0 - p) * size * lambda_v;
    let diff = p * (3.0 * inner - outer) - (1.0 - p) * (size - 1.0) * lambda_v;
    VertexContribution {
        sum,
        diff,
        blended: q * sum + (1.0 - q) * diff,
    }
}

/// Removal score of `v` within `s` for the peeling parameters `(p, q)`.
pub fn contribution(
    g: &Graph,
    s: &VertexSet,
    lam: &DualSolution,
    v: usize,
    p: f64,
    q: f64,
) -> Result<VertexContribution> {
    check_weight("p", p)?;
    check_weight("q", q)?;
    check_duals(g, lam)?;
    if !s.contains(v) {
        return Err(invalid(format!("vertex {v} is not in the subset")));
    }
    let inner = g.neighbors(v).iter().filter(|&&u| s.contains(u)).count();
    Ok(contribution_parts(
        inner,
        g.degree(v),
        s.len(),
        lam[v],
        p,
        q,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    fn p3() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    fn set(v: &[usize]) -> VertexSet {
        VertexSet::new(v.to_vec())
    }

    #[test]
    fn contributions() {
        assert_eq!(cluster_contribution(&k3(), &set(&[0, 1, 2])).unwrap(), 2.0);
        assert_eq!(cluster_contribution(&p3(), &set(&[1])).unwrap(), -2.0);
        assert_eq!(cluster_contribution(&p3(), &set(&[0, 1])).unwrap(), 0.5);
        assert!(cluster_contribution(&p3(), &VertexSet::default()).is_err());
    }

    #[test]
    fn isolated_vertex_contributes_zero() {
        let g = Graph::from_edges(2, []).unwrap();
        assert_eq!(cluster_contribution(&g, &set(&[0])).unwrap(), 0.0);
    }

    #[test]
    fn densities() {
        let whole = Partition::new(3, vec![set(&[0, 1, 2])]).unwrap();
        assert_eq!(modularity_density(&k3(), &whole).unwrap(), 2.0);
        let split = Partition::new(3, vec![set(&[0, 1]), set(&[2])]).unwrap();
        assert_eq!(modularity_density(&p3(), &split).unwrap(), -0.5);
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(3, vec![set(&[0, 1])]).is_err());
        assert!(Partition::new(3, vec![set(&[0, 1]), set(&[1, 2])]).is_err());
        assert!(Partition::new(3, vec![set(&[0, 1, 2]), VertexSet::default()]).is_err());
        let p = Partition::from_labels(&[1, 0, 1]).unwrap();
        assert_eq!(p.clusters(), &[set(&[1]), set(&[0, 2])]);
        assert_eq!(p.cluster_of(2), 1);
    }

    #[test]
    fn pricing_values() {
        let v = set(&[0, 1, 2]);
        let zero = DualSolution::zeros(3);
        assert_eq!(pricing_objective(&k3(), &v, &zero).unwrap(), 2.0);
        let low = DualSolution::constant(3, -2.0);
        assert_eq!(pricing_objective(&k3(), &v, &low).unwrap(), 8.0);
        let feasible = DualSolution::constant(3, 2.0 / 3.0);
        assert!(pricing_objective(&k3(), &v, &feasible).unwrap().abs() < 1e-12);
        assert!(pricing_objective(&k3(), &VertexSet::default(), &zero).is_err());
    }

    #[test]
    fn blended_values() {
        let v = set(&[0, 1, 2]);
        let ones = DualSolution::constant(3, 1.0);
        assert_eq!(blended_objective(&k3(), &v, &ones, 1.0).unwrap(), 2.0);
        assert_eq!(blended_objective(&k3(), &v, &ones, 0.0).unwrap(), -3.0);
        assert_eq!(blended_objective(&k3(), &v, &ones, 0.5).unwrap(), -0.5);
        assert!(blended_objective(&k3(), &v, &ones, 1.5).is_err());
    }

    #[test]
    fn vertex_contributions() {
        let v = set(&[0, 1, 2]);
        let lam = DualSolution::constant(3, 7.0);
        let c = contribution(&k3(), &v, &lam, 0, 1.0, 0.5).unwrap();
        assert_eq!((c.sum, c.diff, c.blended), (2.0, 6.0, 4.0));

        let ones = DualSolution::constant(3, 1.0);
        let s = set(&[0, 1]);
        assert_eq!(
            contribution(&p3(), &s, &ones, 0, 0.5, 1.0).unwrap().blended,
            -0.5
        );
        assert_eq!(
            contribution(&p3(), &s, &ones, 1, 0.5, 1.0).unwrap().blended,
            -1.0
        );
        assert!(contribution(&p3(), &s, &ones, 2, 0.5, 1.0).is_err());
        assert!(contribution(&p3(), &s, &ones, 0, 0.5, -0.1).is_err());
    }
}
