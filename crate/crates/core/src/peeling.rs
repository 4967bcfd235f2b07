//! Greedy peeling: the classical densest-subgraph peel and the
//! multi-parameter pricing heuristic built on it.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::{Graph, VertexSet};
use crate::objective::{contribution_parts, DualSolution};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeelConfig {
    pub p_grid: Vec<f64>,
    pub q_grid: Vec<f64>,
    pub epsilon: f64,
}

impl Default for PeelConfig {
    fn default() -> Self {
        Self {
            p_grid: (0..=10).map(|i| i as f64 / 10.0).collect(),
            q_grid: vec![0.0, 0.5, 1.0],
            epsilon: 1e-6,
        }
    }
}

impl PeelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p_grid.is_empty() || self.q_grid.is_empty() {
            return Err(invalid("peeling grids must be nonempty"));
        }
        for &w in self.p_grid.iter().chain(&self.q_grid) {
            if !(0.0..=1.0).contains(&w) {
                return Err(invalid(format!("grid value {w} outside [0, 1]")));
            }
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(invalid(format!(
                "epsilon = {} must be positive",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Classical greedy peel for `max |E(S)|/|S|`: repeatedly drop a vertex of
/// minimum induced degree (lowest id on ties) and return the densest set
/// seen. Ties favour the larger set.
pub fn peel_densest(g: &Graph) -> Result<VertexSet> {
    let n = g.n();
    if n == 0 {
        return Err(invalid("peeling an empty graph"));
    }
    let mut alive = vec![true; n];
    let mut inner: Vec<usize> = g.degrees().collect();
    let mut edges = g.m();
    let mut removed = Vec::with_capacity(n);
    // best as (edges, size, number of removals before it)
    let mut best = (edges, n, 0);

    for size in (2..=n).rev() {
        let v = (0..n)
            .filter(|&v| alive[v])
            .min_by_key(|&v| (inner[v], v))
            .expect("set is nonempty");
        alive[v] = false;
        edges -= inner[v];
        for &u in g.neighbors(v) {
            if alive[u] {
                inner[u] -= 1;
            }
        }
        removed.push(v);
        let remaining = size - 1;
        if edges * best.1 > best.0 * remaining {
            best = (edges, remaining, removed.len());
        }
    }

    let dropped: HashSet<usize> = removed[..best.2].iter().copied().collect();
    Ok((0..n).filter(|v| !dropped.contains(v)).collect())
}

/// One peeling pass for fixed `(p, q)`.
#[derive(Clone, Debug)]
pub struct PeelTrace {
    /// Vertices in the order they were removed; `n - 1` entries.
    pub removal_order: Vec<usize>,
    /// `values[i]` is `g(S)` for the set of size `n - i`, down to size 2.
    pub values: Vec<f64>,
    /// Number of per-vertex contribution evaluations performed.
    pub evaluations: usize,
}

impl PeelTrace {
    /// The nested set of the given size (`1..=n`).
    pub fn subset(&self, n: usize, size: usize) -> VertexSet {
        let dropped: HashSet<usize> = self.removal_order[..n - size].iter().copied().collect();
        (0..n).filter(|v| !dropped.contains(v)).collect()
    }
}

/// Runs one pass from `V` down to a single vertex, removing the vertex of
/// minimum `cont_{p,q}` (lowest id on ties) at every step. Contributions of
/// all remaining vertices are recomputed each step because both measures
/// depend on the current set size.
pub fn peel_trace(g: &Graph, lam: &DualSolution, p: f64, q: f64) -> PeelTrace {
    let n = g.n();
    let mut alive = vec![true; n];
    let mut inner: Vec<usize> = g.degrees().collect();
    let mut inner_edges = g.m() as i64;
    let mut volume: i64 = g.degrees().map(|d| d as i64).sum();
    let mut removal_order = Vec::with_capacity(n.saturating_sub(1));
    let mut values = Vec::with_capacity(n.saturating_sub(1));
    let mut evaluations = 0;

    for size in (2..=n).rev() {
        let mut dual_sum = 0.0;
        let mut argmin = (f64::INFINITY, usize::MAX);
        for v in (0..n).filter(|&v| alive[v]) {
            dual_sum += lam[v];
            let score = contribution_parts(inner[v], g.degree(v), size, lam[v], p, q).blended;
            evaluations += 1;
            if score < argmin.0 || argmin.1 == usize::MAX {
                argmin = (score, v);
            }
        }
        values.push((4 * inner_edges - volume) as f64 / size as f64 - dual_sum);

        let v = argmin.1;
        alive[v] = false;
        inner_edges -= inner[v] as i64;
        volume -= g.degree(v) as i64;
        for &u in g.neighbors(v) {
            if alive[u] {
                inner[u] -= 1;
            }
        }
        removal_order.push(v);
    }

    PeelTrace {
        removal_order,
        values,
        evaluations,
    }
}

/// Work counters for a pricing call.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PeelStats {
    pub passes: usize,
    pub evaluations: usize,
}

/// Every set on any `(p, q)` peeling sequence whose pricing objective
/// exceeds `epsilon`, deduplicated and minus `exclude`. Singletons are never
/// produced. Output order follows the grids, then decreasing set size.
pub fn peel_pricing(
    g: &Graph,
    lam: &DualSolution,
    cfg: &PeelConfig,
    exclude: Option<&HashSet<VertexSet>>,
) -> Result<Vec<VertexSet>> {
    peel_pricing_with_stats(g, lam, cfg, exclude).map(|(sets, _)| sets)
}

pub fn peel_pricing_with_stats(
    g: &Graph,
    lam: &DualSolution,
    cfg: &PeelConfig,
    exclude: Option<&HashSet<VertexSet>>,
) -> Result<(Vec<VertexSet>, PeelStats)> {
    cfg.validate()?;
    if lam.len() != g.n() {
        return Err(invalid("dual vector length differs from n"));
    }
    let n = g.n();
    let params: Vec<(f64, f64)> = cfg
        .p_grid
        .iter()
        .flat_map(|&p| cfg.q_grid.iter().map(move |&q| (p, q)))
        .collect();

    let traces: Vec<PeelTrace> = params
        .par_iter()
        .map(|&(p, q)| peel_trace(g, lam, p, q))
        .collect();

    let mut seen: HashSet<VertexSet> = HashSet::new();
    let mut found = Vec::new();
    let mut stats = PeelStats::default();
    for trace in &traces {
        stats.passes += 1;
        stats.evaluations += trace.evaluations;
        for (i, &value) in trace.values.iter().enumerate() {
            if value <= cfg.epsilon {
                continue;
            }
            let set = trace.subset(n, n - i);
            if exclude.is_some_and(|ex| ex.contains(&set)) || seen.contains(&set) {
                continue;
            }
            seen.insert(set.clone());
            found.push(set);
        }
    }
    Ok((found, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::pricing_objective;

    fn complete(n: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Graph::from_edges(n, edges).unwrap()
    }

    fn k4_pendant() -> Graph {
        let mut edges = vec![(3, 4)];
        for u in 0..4 {
            for v in u + 1..4 {
                edges.push((u, v));
            }
        }
        Graph::from_edges(5, edges).unwrap()
    }

    #[test]
    fn default_grids() {
        let cfg = PeelConfig::default();
        assert_eq!(cfg.p_grid.len(), 11);
        assert_eq!(cfg.p_grid[3], 0.3);
        assert_eq!(cfg.q_grid, vec![0.0, 0.5, 1.0]);
        assert_eq!(cfg.epsilon, 1e-6);
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = PeelConfig::default();
        cfg.q_grid.clear();
        assert!(cfg.validate().is_err());
        let cfg = PeelConfig {
            p_grid: vec![1.2],
            ..PeelConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = PeelConfig {
            epsilon: 0.0,
            ..PeelConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn densest_on_toys() {
        assert_eq!(
            peel_densest(&k4_pendant()).unwrap(),
            VertexSet::new(vec![0, 1, 2, 3])
        );
        assert_eq!(peel_densest(&complete(6)).unwrap().len(), 6);
        assert_eq!(
            peel_densest(&Graph::from_edges(4, []).unwrap())
                .unwrap()
                .len(),
            4
        );
        assert!(peel_densest(&Graph::from_edges(0, []).unwrap()).is_err());
    }

    #[test]
    fn pricing_on_triangle() {
        let g = complete(3);
        let cfg = PeelConfig::default();
        let v = g.all_vertices();

        let sets = peel_pricing(&g, &DualSolution::zeros(3), &cfg, None).unwrap();
        assert!(sets.contains(&v));

        let feasible = DualSolution::constant(3, 2.0 / 3.0);
        assert!(peel_pricing(&g, &feasible, &cfg, None).unwrap().is_empty());

        let low = DualSolution::constant(3, -2.0);
        let sets = peel_pricing(&g, &low, &cfg, None).unwrap();
        assert!(sets.contains(&v));
        assert!(sets.iter().all(|s| s.len() >= 2));
        // every peel on K3 drops vertex 0 first by the id tie rule
        assert!(sets.contains(&VertexSet::new(vec![1, 2])));
        for s in &sets {
            assert!(pricing_objective(&g, s, &low).unwrap() > cfg.epsilon);
        }
    }

    #[test]
    fn exclusion_filters_known_columns() {
        let g = complete(3);
        let v = g.all_vertices();
        let known: HashSet<VertexSet> = [v.clone()].into_iter().collect();
        let sets = peel_pricing(
            &g,
            &DualSolution::zeros(3),
            &PeelConfig::default(),
            Some(&known),
        )
        .unwrap();
        assert!(!sets.contains(&v));
    }

    #[test]
    fn trace_subsets_are_nested() {
        let g = k4_pendant();
        let lam = DualSolution::new(vec![0.1, -0.3, 0.2, 0.0, 0.5]).unwrap();
        let trace = peel_trace(&g, &lam, 0.4, 0.5);
        assert_eq!(trace.removal_order.len(), 4);
        assert_eq!(trace.values.len(), 4);
        for size in 1..5 {
            let small = trace.subset(5, size);
            let big = trace.subset(5, size + 1);
            assert!(small.iter().all(|v| big.contains(v)));
        }
        for (i, &value) in trace.values.iter().enumerate() {
            let s = trace.subset(5, 5 - i);
            assert!((pricing_objective(&g, &s, &lam).unwrap() - value).abs() < 1e-12);
        }
    }

    #[test]
    fn pass_work_is_quadratic() {
        let path = |n: usize| Graph::from_edges(n, (1..n).map(|v| (v - 1, v))).unwrap();
        let cfg = PeelConfig {
            p_grid: vec![0.5],
            q_grid: vec![0.5],
            epsilon: 1e-6,
        };
        let work = |n: usize| {
            peel_pricing_with_stats(&path(n), &DualSolution::zeros(n), &cfg, None)
                .unwrap()
                .1
                .evaluations
        };
        for n in [50, 100, 200] {
            assert_eq!(work(n), n * (n + 1) / 2 - 1);
        }
        let ratio = work(400) as f64 / work(200) as f64;
        assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
    }
}
