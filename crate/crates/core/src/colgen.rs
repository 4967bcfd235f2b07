//! The column generation driver.
//!
//! Starting from the singleton columns, each round solves the restricted
//! master, prices with the peeling heuristic and falls back to exact
//! pricing only when peeling finds nothing. An exact pass with no violated
//! set certifies the duals optimal for the full dual problem.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::lp::{Column, LpSolution, MasterLp, MasterStatus, SimplexMaster};
use crate::objective::{modularity_density, pricing_objective, DualSolution, Partition};
use crate::peeling::{peel_pricing, PeelConfig};
use crate::pricing::{exact_pricing, ExactConfig};

/// Distance from {0, 1} under which a master value counts as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;
const MONOTONE_TOL: f64 = 1e-7;
/// Search nodes for the integer master run on a fractional finish.
const FALLBACK_NODE_LIMIT: usize = 5_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColGenConfig {
    pub peel: PeelConfig,
    pub epsilon: f64,
    pub time_limit: Option<Duration>,
    pub max_iterations: usize,
    pub skip_k1: bool,
    pub early_exit_exact: bool,
    /// Most violated columns kept per round; `None` keeps all.
    pub column_cap: Option<usize>,
    pub parallel: bool,
    /// Extra starting columns besides the singletons.
    pub warm_start: Vec<VertexSet>,
    /// Solve the integer master over generated columns when the final LP
    /// solution is fractional.
    pub resolve_fractional: bool,
}

impl Default for ColGenConfig {
    fn default() -> Self {
        Self {
            peel: PeelConfig::default(),
            epsilon: 1e-6,
            time_limit: None,
            max_iterations: 10_000,
            skip_k1: true,
            early_exit_exact: false,
            column_cap: None,
            parallel: true,
            warm_start: Vec::new(),
            resolve_fractional: true,
        }
    }
}

impl ColGenConfig {
    pub fn validate(&self) -> Result<()> {
        self.peel.validate()?;
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(invalid("epsilon must be positive"));
        }
        if self.max_iterations == 0 || self.column_cap == Some(0) {
            return Err(invalid("iteration and column limits must be positive"));
        }
        if self.time_limit == Some(Duration::ZERO) {
            return Err(invalid("time limit must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    DualOptimal,
    TimeLimit,
    IterationLimit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrimalStatus {
    /// The final master solution is integral: the partition is optimal for
    /// the master's column set and, with a certificate, globally.
    Integral,
    /// Fractional master; the partition comes from the integer master over
    /// generated columns and is a lower bound only.
    Fractional,
    /// Fractional master with no partition recovered.
    FractionalUnresolved,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PricingMode {
    Peel,
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub mode: PricingMode,
    pub columns_added: usize,
    /// Restricted master optimum whose duals were priced this round.
    pub master_objective: f64,
    pub elapsed: Duration,
    /// Smallest pricing objective among the added columns.
    pub min_violation: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ColGenReport {
    /// Sum of the final duals. An upper bound on the optimum when
    /// `certificate` holds; otherwise only the restricted master value.
    pub dual_objective: f64,
    pub duals: DualSolution,
    pub status: SolveStatus,
    pub primal_status: PrimalStatus,
    pub partition: Option<Partition>,
    pub modularity_density: Option<f64>,
    pub iterations: Vec<IterationRecord>,
    pub columns: Vec<VertexSet>,
    pub duplicates_dropped: usize,
    pub exact_calls: usize,
    pub certificate: bool,
    pub elapsed: Duration,
}

impl ColGenReport {
    pub fn total_columns(&self) -> usize {
        self.columns.len()
    }

    /// True when the partition is proven optimal.
    pub fn proved_optimal(&self) -> bool {
        self.certificate && self.primal_status == PrimalStatus::Integral
    }
}

/// Reads a partition off the master solution when every value is within
/// [`INTEGRALITY_TOL`] of 0 or 1.
pub fn recover_primal(
    sol: &LpSolution,
    columns: &[Column],
    n: usize,
) -> Result<(PrimalStatus, Option<Partition>)> {
    if sol.primal.len() != columns.len() {
        return Err(invalid("primal vector and column list differ in length"));
    }
    let integral = sol
        .primal
        .iter()
        .all(|&z| z.abs() <= INTEGRALITY_TOL || (z - 1.0).abs() <= INTEGRALITY_TOL);
    if !integral {
        return Ok((PrimalStatus::Fractional, None));
    }
    let clusters: Vec<VertexSet> = columns
        .iter()
        .zip(&sol.primal)
        .filter(|(_, &z)| z > 0.5)
        .map(|(c, _)| c.set.clone())
        .collect();
    let partition = Partition::new(n, clusters).map_err(|e| {
        Error::Internal(format!("integral master solution is not a partition: {e}"))
    })?;
    Ok((PrimalStatus::Integral, Some(partition.canonical())))
}

/// Best set partition using only the given columns, by depth-first
/// branch-and-bound: the lowest uncovered vertex is covered by each
/// compatible column in turn, and a branch is cut when its value plus the
/// best per-vertex share `c(S)/|S|` of the uncovered vertices cannot beat
/// the incumbent. The singletons must be among the columns.
pub fn integer_restricted_master(columns: &[Column], n: usize) -> Result<Partition> {
    integer_restricted_master_limited(columns, n, usize::MAX).map(|(p, _)| p)
}

/// As [`integer_restricted_master`], stopping after `node_limit` nodes.
/// The flag is true when the search finished.
pub fn integer_restricted_master_limited(
    columns: &[Column],
    n: usize,
    node_limit: usize,
) -> Result<(Partition, bool)> {
    let mut by_vertex: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut share = vec![f64::NEG_INFINITY; n];
    let mut singleton = vec![None; n];
    for (j, col) in columns.iter().enumerate() {
        let ratio = col.contribution / col.set.len() as f64;
        for v in col.set.iter() {
            if v >= n {
                return Err(invalid(format!("column names vertex {v} outside 0..{n}")));
            }
            share[v] = share[v].max(ratio);
        }
        let first = col.set.members()[0];
        by_vertex[first].push(j);
        if col.set.len() == 1 {
            singleton[first] = Some(j);
        }
    }
    if singleton.iter().any(Option::is_none) {
        return Err(Error::Precondition(
            "integer master needs every singleton column".into(),
        ));
    }
    // columns are only tried at their smallest member; most promising first
    for list in &mut by_vertex {
        list.sort_by(|&a, &b| columns[b].contribution.total_cmp(&columns[a].contribution));
    }

    struct Search<'a> {
        columns: &'a [Column],
        by_vertex: &'a [Vec<usize>],
        share: &'a [f64],
        covered: Vec<bool>,
        chosen: Vec<usize>,
        best: f64,
        best_choice: Vec<usize>,
        nodes: usize,
        node_limit: usize,
    }

    impl Search<'_> {
        fn visit(&mut self, from: usize, value: f64, remaining_share: f64) {
            self.nodes += 1;
            if self.nodes > self.node_limit {
                return;
            }
            let Some(u) = (from..self.covered.len()).find(|&v| !self.covered[v]) else {
                if value > self.best + 1e-12 {
                    self.best = value;
                    self.best_choice = self.chosen.clone();
                }
                return;
            };
            if value + remaining_share <= self.best + 1e-12 {
                return;
            }
            for &j in &self.by_vertex[u] {
                let set = &self.columns[j].set;
                if set.iter().any(|v| self.covered[v]) {
                    continue;
                }
                let used: f64 = set.iter().map(|v| self.share[v]).sum();
                for v in set.iter() {
                    self.covered[v] = true;
                }
                self.chosen.push(j);
                self.visit(
                    u + 1,
                    value + self.columns[j].contribution,
                    remaining_share - used,
                );
                self.chosen.pop();
                for v in set.iter() {
                    self.covered[v] = false;
                }
            }
        }
    }

    let singles: Vec<usize> = singleton.into_iter().map(|s| s.expect("checked")).collect();
    let start_value: f64 = singles.iter().map(|&j| columns[j].contribution).sum();
    let mut search = Search {
        columns,
        by_vertex: &by_vertex,
        share: &share,
        covered: vec![false; n],
        chosen: Vec::new(),
        best: start_value,
        best_choice: singles,
        nodes: 0,
        node_limit,
    };
    let total_share: f64 = share.iter().sum();
    search.visit(0, 0.0, total_share);
    let finished = search.nodes <= node_limit;
    let clusters = search
        .best_choice
        .iter()
        .map(|&j| columns[j].set.clone())
        .collect();
    Ok((Partition::new(n, clusters)?.canonical(), finished))
}

/// Full column generation on `g`.
pub fn run_colgen(g: &Graph, cfg: &ColGenConfig) -> Result<ColGenReport> {
    cfg.validate()?;
    let n = g.n();
    if n == 0 {
        return Err(invalid("column generation on an empty graph"));
    }
    let start = Instant::now();
    let deadline = cfg.time_limit.map(|t| start + t);
    let peel_cfg = PeelConfig {
        epsilon: cfg.epsilon,
        ..cfg.peel.clone()
    };

    let mut initial = Column::singletons(g);
    let mut known: HashSet<VertexSet> = initial.iter().map(|c| c.set.clone()).collect();
    for set in &cfg.warm_start {
        if set.is_empty() || set.members().last().is_some_and(|&v| v >= n) {
            return Err(invalid(format!(
                "warm-start column {set:?} is not a subset of V"
            )));
        }
        if known.insert(set.clone()) {
            initial.push(Column::new(g, set.clone())?);
        }
    }
    let mut master = SimplexMaster::new(n, initial)?;

    let mut iterations = Vec::new();
    let mut duplicates_dropped = 0;
    let mut exact_calls = 0;
    let mut certificate = false;
    let mut previous = f64::NEG_INFINITY;

    let (status, solution) = loop {
        let sol = master.solve()?;
        if sol.status == MasterStatus::IterationLimit {
            return Err(Error::Lp(
                "restricted master hit the simplex iteration cap".into(),
            ));
        }
        if sol.objective < previous - MONOTONE_TOL * (1.0 + previous.abs()) {
            return Err(Error::Internal(format!(
                "restricted master decreased from {previous} to {}",
                sol.objective
            )));
        }
        previous = sol.objective;

        if deadline.is_some_and(|d| Instant::now() >= d) {
            break (SolveStatus::TimeLimit, sol);
        }
        if iterations.len() >= cfg.max_iterations {
            break (SolveStatus::IterationLimit, sol);
        }

        let lam = &sol.duals;
        let mut mode = PricingMode::Peel;
        let mut found = peel_pricing(g, lam, &peel_cfg, Some(&known))?;
        if found.is_empty() {
            mode = PricingMode::Exact;
            exact_calls += 1;
            let exact_cfg = ExactConfig {
                epsilon: cfg.epsilon,
                skip_k1: cfg.skip_k1,
                early_exit: cfg.early_exit_exact,
                time_limit: deadline.map(|d| d.saturating_duration_since(Instant::now())),
                parallel: cfg.parallel,
                peel_seeds: true,
            };
            let priced = exact_pricing(g, lam, &exact_cfg)?;
            log::debug!(
                "exact pricing: best {:.3e}, {} sets, {} nodes",
                priced.best_value,
                priced.collected.len(),
                priced.nodes
            );
            if priced.certifies_feasibility() {
                certificate = true;
                break (SolveStatus::DualOptimal, sol);
            }
            if priced.collected.is_empty() {
                break (SolveStatus::TimeLimit, sol);
            }
            let before = priced.collected.len();
            found = priced
                .collected
                .into_iter()
                .filter(|s| !known.contains(s))
                .collect();
            duplicates_dropped += before - found.len();
        }

        let mut scored: Vec<(f64, VertexSet)> = Vec::with_capacity(found.len());
        for set in found {
            let violation = pricing_objective(g, &set, lam)?;
            if violation > cfg.epsilon {
                scored.push((violation, set));
            }
        }
        if scored.is_empty() {
            return Err(Error::Internal(
                "pricing reported violated sets that are already in the master".into(),
            ));
        }
        if let Some(cap) = cfg.column_cap {
            scored.sort_by(|a, b| b.0.total_cmp(&a.0));
            scored.truncate(cap);
        }
        let min_violation = scored.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
        let added = scored.len();
        let mut columns = Vec::with_capacity(added);
        for (_, set) in scored {
            known.insert(set.clone());
            columns.push(Column::new(g, set)?);
        }
        master.append_columns(columns)?;
        iterations.push(IterationRecord {
            iteration: iterations.len() + 1,
            mode,
            columns_added: added,
            master_objective: sol.objective,
            elapsed: start.elapsed(),
            min_violation: Some(min_violation),
        });
        log::info!(
            "iteration {}: {:?} added {added}, master {:.6}",
            iterations.len(),
            mode,
            sol.objective
        );
    };

    let columns = master.columns();
    let (mut primal_status, mut partition) = recover_primal(&solution, columns, n)?;
    if primal_status == PrimalStatus::Fractional {
        if cfg.resolve_fractional {
            let (best, finished) =
                integer_restricted_master_limited(columns, n, FALLBACK_NODE_LIMIT)?;
            if !finished {
                log::warn!("integer master stopped after {FALLBACK_NODE_LIMIT} nodes");
            }
            partition = Some(best);
        } else {
            primal_status = PrimalStatus::FractionalUnresolved;
        }
    }
    let modularity_density = partition
        .as_ref()
        .map(|p| modularity_density(g, p))
        .transpose()?;

    Ok(ColGenReport {
        dual_objective: solution.duals.sum(),
        duals: solution.duals,
        status,
        primal_status,
        partition,
        modularity_density,
        iterations,
        columns: columns.iter().map(|c| c.set.clone()).collect(),
        duplicates_dropped,
        exact_calls,
        certificate,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::solve_restricted_master;

    fn k3() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn triangle() {
        let r = run_colgen(&k3(), &ColGenConfig::default()).unwrap();
        assert!((r.dual_objective - 2.0).abs() < 1e-9);
        assert_eq!(r.primal_status, PrimalStatus::Integral);
        assert!(r.certificate);
        assert_eq!(r.partition.unwrap().clusters(), &[k3().all_vertices()]);
        assert!((r.modularity_density.unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn edgeless() {
        let g = Graph::from_edges(3, []).unwrap();
        let r = run_colgen(&g, &ColGenConfig::default()).unwrap();
        assert_eq!(r.dual_objective, 0.0);
        assert_eq!(r.partition.unwrap().len(), 3);
        assert_eq!(r.modularity_density, Some(0.0));
        assert!(r.certificate);
    }

    #[test]
    fn recover_integral_and_fractional() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let cols = vec![
            Column::new(&g, VertexSet::new(vec![0])).unwrap(),
            Column::new(&g, VertexSet::new(vec![0, 1])).unwrap(),
            Column::new(&g, VertexSet::new(vec![1])).unwrap(),
            Column::new(&g, VertexSet::new(vec![0, 1])).unwrap(),
        ];
        let sol = |z: Vec<f64>| LpSolution {
            objective: 0.0,
            primal: z,
            duals: DualSolution::zeros(2),
            basis: vec![],
            status: MasterStatus::Optimal,
        };
        let (status, p) = recover_primal(&sol(vec![1.0, 0.0, 1.0, 0.0]), &cols, 2).unwrap();
        assert_eq!(status, PrimalStatus::Integral);
        assert_eq!(p.unwrap().len(), 2);
        let (status, p) = recover_primal(&sol(vec![0.5, 0.5, 0.5, 0.0]), &cols, 2).unwrap();
        assert_eq!(status, PrimalStatus::Fractional);
        assert!(p.is_none());
        assert!(matches!(
            recover_primal(&sol(vec![1.0, 1.0, 0.0, 0.0]), &cols, 2),
            Err(Error::Internal(_))
        ));
    }

    #[test]
    fn recover_triangle_terminal_solution() {
        let g = k3();
        let mut cols = Column::singletons(&g);
        cols.push(Column::new(&g, g.all_vertices()).unwrap());
        let sol = solve_restricted_master(3, cols.clone()).unwrap();
        let (status, p) = recover_primal(&sol, &cols, 3).unwrap();
        assert_eq!(status, PrimalStatus::Integral);
        assert_eq!(p.unwrap().clusters(), &[g.all_vertices()]);
    }

    #[test]
    fn integer_master_toys() {
        let g = k3();
        let p = integer_restricted_master(&Column::singletons(&g), 3).unwrap();
        assert_eq!(p.len(), 3);
        let mut cols = Column::singletons(&g);
        cols.push(Column::new(&g, g.all_vertices()).unwrap());
        let p = integer_restricted_master(&cols, 3).unwrap();
        assert_eq!(p.clusters(), &[g.all_vertices()]);
        assert!(integer_restricted_master(&cols[1..], 3).is_err());
    }

    #[test]
    fn config_validation() {
        let cfg = ColGenConfig {
            epsilon: -1.0,
            ..ColGenConfig::default()
        };
        assert!(run_colgen(&k3(), &cfg).is_err());
        let cfg = ColGenConfig {
            column_cap: Some(0),
            ..ColGenConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn column_cap_still_converges() {
        let g =
            Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]).unwrap();
        let cfg = ColGenConfig {
            column_cap: Some(1),
            ..ColGenConfig::default()
        };
        let r = run_colgen(&g, &cfg).unwrap();
        assert!(r.certificate);
        assert!(r.iterations.iter().all(|it| it.columns_added == 1));
        let full = run_colgen(&g, &ColGenConfig::default()).unwrap();
        assert!((r.dual_objective - full.dual_objective).abs() < 1e-6);
    }
}
