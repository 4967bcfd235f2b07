//! Exact pricing.
//!
//! Fixing the subset size to `k` turns the fractional pricing problem
//! `min lambda(S) - c(S)` into the 0-1 linear program
//!
//! ```text
//! min  sum_v (lambda_v + deg(v)/k) y_v - (4/k) sum_e x_e
//! s.t. sum_v y_v = k,  x_e <= y_u,  x_e <= y_v  (e = {u, v}),  x, y in {0, 1}
//! ```
//!
//! Each size is solved by depth-first branch-and-bound on the `y`
//! variables over the LP relaxation, and every integer solution met along
//! the way with objective below `-epsilon` is kept as a candidate column.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::lp::{LpStatus, Simplex};
use crate::objective::DualSolution;
use crate::oracles::adjacency_masks;
use crate::peeling::{peel_trace, PeelConfig};

pub const ENUMERATION_LIMIT: usize = 25;

const INTEGRALITY_TOL: f64 = 1e-7;
const PRUNE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactConfig {
    pub epsilon: f64,
    /// Skip `k = 1`; sound only when every singleton is already a column.
    pub skip_k1: bool,
    /// Stop after the first size that yields a violated set.
    pub early_exit: bool,
    /// Shared budget for the whole `k` loop.
    pub time_limit: Option<Duration>,
    /// Solve the sizes on the rayon pool instead of one after another.
    pub parallel: bool,
    /// Seed each size with the best set of that size on the peeling
    /// sequences.
    pub peel_seeds: bool,
}

impl Default for ExactConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            skip_k1: false,
            early_exit: false,
            time_limit: None,
            parallel: true,
            peel_seeds: true,
        }
    }
}

/// One branch-and-bound node as seen by the audit log.
#[derive(Clone, Debug)]
pub struct NodeRecord {
    /// Fixed `y` values; `None` is free.
    pub fixed: Vec<Option<bool>>,
    /// LP relaxation value, `None` when the node is infeasible.
    pub bound: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ApkOutcome {
    pub k: usize,
    /// Best value found; exact when `complete`.
    pub optimum: f64,
    pub best_set: Option<VertexSet>,
    pub collected: Vec<VertexSet>,
    pub nodes: usize,
    pub complete: bool,
    pub node_log: Option<Vec<NodeRecord>>,
}

#[derive(Clone, Debug)]
pub struct PricingResult {
    /// Minimum of `lambda(S) - c(S)` over the sizes that were solved.
    pub best_value: f64,
    pub best_set: Option<VertexSet>,
    /// Every set met with objective below `-epsilon`, deduplicated.
    pub collected: Vec<VertexSet>,
    pub per_k_optima: Vec<(usize, f64)>,
    pub nodes: usize,
    /// True when every requested size finished, so an empty `collected`
    /// proves the duals feasible within epsilon.
    pub complete: bool,
}

impl PricingResult {
    pub fn certifies_feasibility(&self) -> bool {
        self.complete && self.collected.is_empty()
    }
}

/// The AP(k) model laid out on a [`Simplex`].
struct ApkModel {
    lp: Simplex,
    n: usize,
    k: usize,
}

impl ApkModel {
    fn new(g: &Graph, lam: &DualSolution, k: usize) -> Result<Self> {
        let n = g.n();
        let kf = k as f64;
        let edges: Vec<(usize, usize)> = g.edges().collect();
        let rows = 1 + 2 * edges.len();
        let mut y_entries: Vec<Vec<(usize, f64)>> = (0..n).map(|_| vec![(0, 1.0)]).collect();
        for (e, &(u, v)) in edges.iter().enumerate() {
            y_entries[u].push((1 + 2 * e, -1.0));
            y_entries[v].push((2 + 2 * e, -1.0));
        }
        let mut lp = Simplex::new({
            let mut rhs = vec![0.0; rows];
            rhs[0] = kf;
            rhs
        });
        for (v, entries) in y_entries.into_iter().enumerate() {
            lp.add_column(lam[v] + g.degree(v) as f64 / kf, 0.0, 1.0, entries);
        }
        for e in 0..edges.len() {
            lp.add_column(
                -4.0 / kf,
                0.0,
                1.0,
                vec![(1 + 2 * e, 1.0), (2 + 2 * e, 1.0)],
            );
        }
        let mut basis = Vec::with_capacity(rows);
        basis.push(lp.add_column(0.0, 0.0, 0.0, vec![(0, 1.0)]));
        for row in 1..rows {
            basis.push(lp.add_column(0.0, 0.0, 1.0, vec![(row, 1.0)]));
        }
        lp.set_basis(&basis)?;
        Ok(Self { lp, n, k })
    }

    /// Solves the relaxation under the given fixings.
    fn relax(&mut self, fixed: &[Option<bool>]) -> Result<Option<(f64, Vec<f64>)>> {
        let ones = fixed.iter().filter(|f| **f == Some(true)).count();
        let zeros = fixed.iter().filter(|f| **f == Some(false)).count();
        if ones > self.k || self.n - zeros < self.k {
            return Ok(None);
        }
        for (v, f) in fixed.iter().enumerate() {
            let (lo, hi) = match f {
                None => (0.0, 1.0),
                Some(true) => (1.0, 1.0),
                Some(false) => (0.0, 0.0),
            };
            if self.lp.bounds(v) != (lo, hi) {
                self.lp.set_bounds(v, lo, hi);
            }
        }
        match self.lp.solve()? {
            LpStatus::Optimal => {
                let y = self.lp.values()[..self.n].to_vec();
                Ok(Some((self.lp.objective(), y)))
            }
            LpStatus::Infeasible => Ok(None),
            other => Err(Error::Lp(format!(
                "AP({}) relaxation ended {other:?}",
                self.k
            ))),
        }
    }
}

/// Exact `lambda(S) - c(S)` for a set of size `k`.
fn set_value(g: &Graph, lam: &DualSolution, s: &VertexSet) -> f64 {
    let mask = s.mask(g.n());
    let mut twice_inner = 0i64;
    let mut volume = 0i64;
    let mut dual = 0.0;
    for v in s.iter() {
        volume += g.degree(v) as i64;
        twice_inner += g.neighbors(v).iter().filter(|&&u| mask[u]).count() as i64;
        dual += lam[v];
    }
    dual - (2 * twice_inner - volume) as f64 / s.len() as f64
}

struct Search<'a> {
    g: &'a Graph,
    lam: &'a DualSolution,
    epsilon: f64,
    best: f64,
    best_set: Option<VertexSet>,
    collected: Vec<VertexSet>,
    seen: HashSet<VertexSet>,
    log: Option<Vec<NodeRecord>>,
}

impl Search<'_> {
    fn offer(&mut self, set: VertexSet) {
        let value = set_value(self.g, self.lam, &set);
        if value < -self.epsilon && self.seen.insert(set.clone()) {
            self.collected.push(set.clone());
        }
        if value < self.best {
            self.best = value;
            self.best_set = Some(set);
        }
    }
}

fn integral_set(y: &[f64]) -> Option<VertexSet> {
    if y.iter()
        .all(|&v| !(INTEGRALITY_TOL..=1.0 - INTEGRALITY_TOL).contains(&v))
    {
        Some(
            y.iter()
                .enumerate()
                .filter(|(_, &v)| v > 0.5)
                .map(|(i, _)| i)
                .collect(),
        )
    } else {
        None
    }
}

fn branching_vertex(y: &[f64], fixed: &[Option<bool>]) -> usize {
    let mut best = (f64::INFINITY, usize::MAX);
    for (v, &value) in y.iter().enumerate() {
        if fixed[v].is_some() {
            continue;
        }
        let distance = (value - 0.5).abs();
        if distance < best.0 {
            best = (distance, v);
        }
    }
    best.1
}

fn check_inputs(g: &Graph, lam: &DualSolution) -> Result<()> {
    if lam.len() != g.n() {
        return Err(invalid(format!(
            "dual vector has length {} for n = {}",
            lam.len(),
            g.n()
        )));
    }
    Ok(())
}

/// Branch-and-bound for one size, with optional starting sets and node log.
pub fn solve_apk_detailed(
    g: &Graph,
    lam: &DualSolution,
    k: usize,
    epsilon: f64,
    seeds: &[VertexSet],
    deadline: Option<Instant>,
    audit: bool,
) -> Result<ApkOutcome> {
    check_inputs(g, lam)?;
    let n = g.n();
    if k == 0 || k > n {
        return Err(invalid(format!("subset size k = {k} outside 1..={n}")));
    }
    let mut search = Search {
        g,
        lam,
        epsilon,
        best: f64::INFINITY,
        best_set: None,
        collected: Vec::new(),
        seen: HashSet::new(),
        log: audit.then(Vec::new),
    };
    for seed in seeds.iter().filter(|s| s.len() == k) {
        search.offer(seed.clone());
    }

    let mut model = ApkModel::new(g, lam, k)?;
    let mut nodes = 0;
    let mut complete = true;

    let mut evaluate =
        |fixed: &[Option<bool>], search: &mut Search<'_>| -> Result<Option<(f64, Vec<f64>)>> {
            let relaxed = model.relax(fixed)?;
            if let Some(log) = &mut search.log {
                log.push(NodeRecord {
                    fixed: fixed.to_vec(),
                    bound: relaxed.as_ref().map(|r| r.0),
                });
            }
            Ok(relaxed)
        };

    let root = vec![None; n];
    nodes += 1;
    // pending nodes carry their fixings and already computed relaxation
    let mut stack: Vec<(Vec<Option<bool>>, f64, Vec<f64>)> = Vec::new();
    if let Some((bound, y)) = evaluate(&root, &mut search)? {
        match integral_set(&y) {
            Some(set) => search.offer(set),
            None => stack.push((root, bound, y)),
        }
    }

    while let Some((fixed, bound, y)) = stack.pop() {
        if bound >= search.best - PRUNE_TOL {
            continue;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            complete = false;
            break;
        }
        let v = branching_vertex(&y, &fixed);
        let mut children = Vec::with_capacity(2);
        for value in [false, true] {
            let mut child = fixed.clone();
            child[v] = Some(value);
            nodes += 1;
            if let Some((child_bound, child_y)) = evaluate(&child, &mut search)? {
                match integral_set(&child_y) {
                    Some(set) => search.offer(set),
                    None => children.push((child, child_bound, child_y)),
                }
            }
        }
        // better bound explored first
        children.sort_by(|a, b| b.1.total_cmp(&a.1));
        for child in children {
            if child.1 < search.best - PRUNE_TOL {
                stack.push(child);
            }
        }
    }

    Ok(ApkOutcome {
        k,
        optimum: search.best,
        best_set: search.best_set,
        collected: search.collected,
        nodes,
        complete,
        node_log: search.log,
    })
}

/// Optimum of AP(k) and the violated sets found while solving it.
pub fn solve_apk(
    g: &Graph,
    lam: &DualSolution,
    k: usize,
    cfg: &ExactConfig,
) -> Result<(f64, Vec<VertexSet>)> {
    let seeds = if cfg.peel_seeds {
        peel_seeds(g, lam)
    } else {
        Vec::new()
    };
    let deadline = cfg.time_limit.map(|t| Instant::now() + t);
    let outcome = solve_apk_detailed(g, lam, k, cfg.epsilon, &seeds, deadline, false)?;
    if !outcome.complete {
        return Err(Error::Precondition(format!(
            "AP({k}) did not finish within the time limit"
        )));
    }
    Ok((outcome.optimum, outcome.collected))
}

/// For every size, the best-valued set among the default peeling sequences.
pub fn peel_seeds(g: &Graph, lam: &DualSolution) -> Vec<VertexSet> {
    let n = g.n();
    if n == 0 {
        return Vec::new();
    }
    let grid = PeelConfig::default();
    let mut best: Vec<Option<(f64, VertexSet)>> = vec![None; n + 1];
    for &p in &grid.p_grid {
        for &q in &grid.q_grid {
            let trace = peel_trace(g, lam, p, q);
            for (i, &value) in trace.values.iter().enumerate() {
                let size = n - i;
                if best[size].as_ref().is_none_or(|(b, _)| value > *b) {
                    best[size] = Some((value, trace.subset(n, size)));
                }
            }
        }
    }
    best.into_iter().flatten().map(|(_, s)| s).collect()
}

/// Runs AP(k) for every size and merges the results.
pub fn exact_pricing(g: &Graph, lam: &DualSolution, cfg: &ExactConfig) -> Result<PricingResult> {
    check_inputs(g, lam)?;
    if cfg.epsilon.is_nan() || cfg.epsilon <= 0.0 {
        return Err(invalid("epsilon must be positive"));
    }
    let n = g.n();
    let start = Instant::now();
    let first = if cfg.skip_k1 { 2 } else { 1 };
    let sizes: Vec<usize> = (first..=n).collect();
    let seeds = if cfg.peel_seeds {
        peel_seeds(g, lam)
    } else {
        Vec::new()
    };

    let outcomes: Vec<ApkOutcome> = if cfg.parallel && !cfg.early_exit {
        let deadline = cfg.time_limit.map(|t| start + t);
        sizes
            .par_iter()
            .map(|&k| solve_apk_detailed(g, lam, k, cfg.epsilon, &seeds, deadline, false))
            .collect::<Result<_>>()?
    } else {
        let mut outcomes = Vec::with_capacity(sizes.len());
        for (index, &k) in sizes.iter().enumerate() {
            // each size gets an even share of whatever budget is left
            let deadline = cfg.time_limit.map(|t| {
                let remaining = t.saturating_sub(start.elapsed());
                Instant::now() + remaining / (sizes.len() - index) as u32
            });
            let outcome = solve_apk_detailed(g, lam, k, cfg.epsilon, &seeds, deadline, false)?;
            let found = !outcome.collected.is_empty();
            outcomes.push(outcome);
            if cfg.early_exit && found {
                break;
            }
        }
        outcomes
    };

    let mut result = PricingResult {
        best_value: f64::INFINITY,
        best_set: None,
        collected: Vec::new(),
        per_k_optima: Vec::new(),
        nodes: 0,
        complete: outcomes.len() == sizes.len(),
    };
    let mut seen = HashSet::new();
    for outcome in outcomes {
        result.nodes += outcome.nodes;
        result.complete &= outcome.complete;
        result.per_k_optima.push((outcome.k, outcome.optimum));
        if outcome.optimum < result.best_value {
            result.best_value = outcome.optimum;
            result.best_set = outcome.best_set.clone();
        }
        for set in outcome.collected {
            if seen.insert(set.clone()) {
                result.collected.push(set);
            }
        }
    }
    Ok(result)
}

/// `min lambda(S) - c(S)` over every nonempty subset, walking the subsets
/// in Gray-code order with integer edge and volume counts kept
/// incrementally.
pub fn enumerate_pricing(g: &Graph, lam: &DualSolution) -> Result<(f64, VertexSet)> {
    check_inputs(g, lam)?;
    let n = g.n();
    if n > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    if n == 0 {
        return Err(invalid("empty graph"));
    }
    let adj = adjacency_masks(g);
    // dual sums from two half tables avoid accumulated rounding
    let low_bits = n.div_ceil(2);
    let table = |offset: usize, bits: usize| -> Vec<f64> {
        (0..1usize << bits)
            .map(|m| {
                (0..bits)
                    .filter(|b| m >> b & 1 == 1)
                    .map(|b| lam[offset + b])
                    .sum()
            })
            .collect()
    };
    let low = table(0, low_bits);
    let high = table(low_bits, n - low_bits);
    let low_mask = (1u64 << low_bits) - 1;

    let mut mask = 0u64;
    let mut inner = 0i64;
    let mut volume = 0i64;
    let mut best = (f64::INFINITY, 0u64);
    for step in 1u64..1 << n {
        let v = step.trailing_zeros() as usize;
        let bit = 1u64 << v;
        if mask & bit == 0 {
            inner += (adj[v] & mask).count_ones() as i64;
            volume += g.degree(v) as i64;
            mask |= bit;
        } else {
            mask &= !bit;
            inner -= (adj[v] & mask).count_ones() as i64;
            volume -= g.degree(v) as i64;
        }
        let dual = low[(mask & low_mask) as usize] + high[(mask >> low_bits) as usize];
        let value = dual - (4 * inner - volume) as f64 / mask.count_ones() as f64;
        if value < best.0 || (value == best.0 && mask < best.1) {
            best = (value, mask);
        }
    }
    Ok((best.0, VertexSet::from_mask(best.1)))
}
