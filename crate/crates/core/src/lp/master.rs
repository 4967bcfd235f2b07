use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::objective::{cluster_contribution, DualSolution};

use super::simplex::{LpStatus, Simplex, CHECK_TOL};

/// One master variable: a vertex subset with its cached contribution.
#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub set: VertexSet,
    pub contribution: f64,
}

impl Column {
    pub fn new(g: &Graph, set: VertexSet) -> Result<Self> {
        let contribution = cluster_contribution(g, &set)?;
        Ok(Self { set, contribution })
    }

    pub fn singletons(g: &Graph) -> Vec<Self> {
        (0..g.n())
            .map(|v| Self {
                set: VertexSet::singleton(v),
                contribution: -(g.degree(v) as f64),
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MasterStatus {
    Optimal,
    IterationLimit,
}

/// Optimal basic solution of the restricted master
/// `max sum c(S) z_S  s.t.  sum_{S ni v} z_S = 1,  z >= 0`.
#[derive(Clone, Debug)]
pub struct LpSolution {
    pub objective: f64,
    /// One value per column, in column order.
    pub primal: Vec<f64>,
    /// Row duals; an optimal solution of the restricted dual.
    pub duals: DualSolution,
    /// Column indices of the final basis.
    pub basis: Vec<usize>,
    pub status: MasterStatus,
}

/// Contract for restricted-master solvers: accept columns incrementally
/// and reoptimize from the previous basis.
pub trait MasterLp {
    fn append_columns(&mut self, columns: Vec<Column>) -> Result<()>;
    fn solve(&mut self) -> Result<LpSolution>;
    fn columns(&self) -> &[Column];
}

/// Restricted master backed by [`Simplex`], warm-started across calls.
pub struct SimplexMaster {
    n: usize,
    columns: Vec<Column>,
    lp: Simplex,
}

impl SimplexMaster {
    /// The column list must contain every singleton; they form the
    /// starting basis.
    pub fn new(n: usize, columns: Vec<Column>) -> Result<Self> {
        let mut singleton_at = vec![usize::MAX; n];
        for (index, col) in columns.iter().enumerate() {
            if col.set.is_empty() {
                return Err(Error::Precondition(format!("column {index} is empty")));
            }
            if let Some(&v) = col.set.members().last() {
                if v >= n {
                    return Err(Error::Precondition(format!(
                        "column {index} names vertex {v}"
                    )));
                }
            }
            if col.set.len() == 1 && singleton_at[col.set.members()[0]] == usize::MAX {
                singleton_at[col.set.members()[0]] = index;
            }
        }
        if let Some(v) = singleton_at.iter().position(|&i| i == usize::MAX) {
            return Err(Error::Precondition(format!(
                "restricted master needs every singleton column; {{{v}}} is missing"
            )));
        }
        let mut lp = Simplex::new(vec![1.0; n]);
        for col in &columns {
            lp.add_column(
                -col.contribution,
                0.0,
                f64::INFINITY,
                col.set.iter().map(|v| (v, 1.0)).collect(),
            );
        }
        lp.set_basis(&singleton_at)?;
        Ok(Self { n, columns, lp })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn iterations(&self) -> usize {
        self.lp.iterations()
    }
}

impl MasterLp for SimplexMaster {
    fn append_columns(&mut self, columns: Vec<Column>) -> Result<()> {
        for col in columns {
            if col.set.is_empty() || col.set.members().last().is_some_and(|&v| v >= self.n) {
                return Err(Error::Precondition(
                    "column outside the vertex range".into(),
                ));
            }
            self.lp.add_column(
                -col.contribution,
                0.0,
                f64::INFINITY,
                col.set.iter().map(|v| (v, 1.0)).collect(),
            );
            self.columns.push(col);
        }
        Ok(())
    }

    fn solve(&mut self) -> Result<LpSolution> {
        let status = match self.lp.solve()? {
            LpStatus::Optimal => MasterStatus::Optimal,
            LpStatus::IterationLimit => MasterStatus::IterationLimit,
            other => {
                return Err(Error::Lp(format!(
                    "restricted master ended {other:?} despite a feasible start"
                )))
            }
        };
        let duals: Vec<f64> = self.lp.duals().into_iter().map(|y| -y).collect();
        let primal: Vec<f64> = (0..self.columns.len()).map(|j| self.lp.value(j)).collect();
        let objective: f64 = self
            .columns
            .iter()
            .zip(&primal)
            .map(|(c, z)| c.contribution * z)
            .sum();
        let solution = LpSolution {
            objective,
            primal,
            duals: DualSolution::new(duals)?,
            basis: self.lp.basis().to_vec(),
            status,
        };
        if status == MasterStatus::Optimal {
            check_solution(&self.columns, &solution)?;
        }
        Ok(solution)
    }

    fn columns(&self) -> &[Column] {
        &self.columns
    }
}

/// Primal feasibility, dual feasibility on the supplied columns, and
/// strong duality, each within [`CHECK_TOL`] (scaled by the objective).
pub fn check_solution(columns: &[Column], sol: &LpSolution) -> Result<()> {
    let n = sol.duals.len();
    let scale = 1.0 + sol.objective.abs();
    let mut cover = vec![0.0; n];
    for (col, &z) in columns.iter().zip(&sol.primal) {
        if z < -CHECK_TOL {
            return Err(Error::Lp(format!("negative primal value {z}")));
        }
        for v in col.set.iter() {
            cover[v] += z;
        }
    }
    if let Some(v) = cover.iter().position(|c| (c - 1.0).abs() > CHECK_TOL) {
        return Err(Error::Lp(format!("row {v} covered {} times", cover[v])));
    }
    for col in columns {
        if sol.duals.sum_over(&col.set) < col.contribution - CHECK_TOL * scale {
            return Err(Error::Lp(format!("duals violate column {:?}", col.set)));
        }
    }
    let gap = (sol.objective - sol.duals.sum()).abs();
    if gap > CHECK_TOL * scale {
        return Err(Error::Lp(format!("duality gap {gap:e}")));
    }
    Ok(())
}

pub fn solve_restricted_master(n: usize, columns: Vec<Column>) -> Result<LpSolution> {
    SimplexMaster::new(n, columns)?.solve()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn singletons_only() {
        let g = k3();
        let sol = solve_restricted_master(3, Column::singletons(&g)).unwrap();
        assert_eq!(sol.objective, -6.0);
        assert_eq!(sol.duals.values(), &[-2.0, -2.0, -2.0]);
        assert_eq!(sol.primal, vec![1.0; 3]);
    }

    #[test]
    fn triangle_with_whole_set() {
        let g = k3();
        let mut cols = Column::singletons(&g);
        cols.push(Column::new(&g, g.all_vertices()).unwrap());
        let sol = solve_restricted_master(3, cols.clone()).unwrap();
        assert!((sol.objective - 2.0).abs() < 1e-12);
        assert!((sol.duals.sum() - 2.0).abs() < 1e-12);
        for col in &cols {
            assert!(sol.duals.sum_over(&col.set) >= col.contribution - 1e-8);
        }
        assert!((sol.primal[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn missing_singleton_is_rejected() {
        let g = k3();
        let mut cols = Column::singletons(&g);
        cols.remove(1);
        assert!(matches!(
            solve_restricted_master(3, cols),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn warm_start_after_append() {
        let g = k3();
        let mut master = SimplexMaster::new(3, Column::singletons(&g)).unwrap();
        let first = master.solve().unwrap();
        master
            .append_columns(vec![Column::new(&g, VertexSet::new(vec![0, 1])).unwrap()])
            .unwrap();
        let second = master.solve().unwrap();
        master
            .append_columns(vec![Column::new(&g, g.all_vertices()).unwrap()])
            .unwrap();
        let third = master.solve().unwrap();
        assert!(first.objective <= second.objective && second.objective <= third.objective);
        assert!((third.objective - 2.0).abs() < 1e-12);
    }
}
