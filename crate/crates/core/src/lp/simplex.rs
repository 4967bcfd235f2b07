//! Dense revised simplex over bounded variables.
//!
//! Problems are kept in the equality form `min c'x  s.t.  Ax = b,
//! l <= x <= u` with finite lower bounds. The basis inverse is stored
//! explicitly and updated by elementary row operations after each pivot,
//! then rebuilt from scratch every [`REFACTOR_INTERVAL`] pivots.
//!
//! Both primal and dual iterations are available. Callers adding columns
//! keep primal feasibility and continue with primal iterations; callers
//! changing bounds (branch-and-bound) keep dual feasibility and continue
//! with dual iterations.

use crate::error::{Error, Result};

pub const PIVOT_TOL: f64 = 1e-9;
pub const FEAS_TOL: f64 = 1e-9;
pub const OPT_TOL: f64 = 1e-9;
pub const CHECK_TOL: f64 = 1e-8;
pub const DRIFT_TOL: f64 = 1e-7;
pub const REFACTOR_INTERVAL: usize = 100;
pub const BLAND_STREAK: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum VarState {
    Basic(usize),
    Lower,
    Upper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Debug)]
pub struct Simplex {
    rows: usize,
    cols: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    head: Vec<usize>,
    state: Vec<VarState>,
    x: Vec<f64>,
    binv: Vec<f64>,
    since_refactor: usize,
    degenerate_streak: usize,
    iterations: usize,
    pub max_iterations: usize,
    factored: bool,
}

impl Simplex {
    pub fn new(rhs: Vec<f64>) -> Self {
        Self {
            rows: rhs.len(),
            cols: Vec::new(),
            cost: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            rhs,
            head: Vec::new(),
            state: Vec::new(),
            x: Vec::new(),
            binv: Vec::new(),
            since_refactor: 0,
            degenerate_streak: 0,
            iterations: 0,
            max_iterations: 500_000,
            factored: false,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn num_columns(&self) -> usize {
        self.cols.len()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Appends a column, nonbasic at its lower bound.
    pub fn add_column(
        &mut self,
        cost: f64,
        lower: f64,
        upper: f64,
        entries: Vec<(usize, f64)>,
    ) -> usize {
        debug_assert!(lower.is_finite() && lower <= upper);
        debug_assert!(entries.iter().all(|&(r, _)| r < self.rows));
        self.cols.push(entries);
        self.cost.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.state.push(VarState::Lower);
        self.x.push(lower);
        self.cols.len() - 1
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    /// Changes the bounds of a column. A nonbasic column moves to the
    /// matching bound; basic values are refreshed on the next solve.
    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        debug_assert!(lower.is_finite() && lower <= upper);
        self.lower[j] = lower;
        self.upper[j] = upper;
        match self.state[j] {
            VarState::Lower => self.x[j] = lower,
            VarState::Upper if upper.is_finite() => self.x[j] = upper,
            VarState::Upper => {
                self.state[j] = VarState::Lower;
                self.x[j] = lower;
            }
            VarState::Basic(_) => {}
        }
    }

    /// Installs a starting basis, one column per row.
    pub fn set_basis(&mut self, basic: &[usize]) -> Result<()> {
        if basic.len() != self.rows {
            return Err(Error::Lp(format!(
                "basis has {} columns for {} rows",
                basic.len(),
                self.rows
            )));
        }
        for (j, state) in self.state.iter_mut().enumerate() {
            if let VarState::Basic(_) = state {
                *state = VarState::Lower;
                self.x[j] = self.lower[j];
            }
        }
        for (r, &j) in basic.iter().enumerate() {
            self.state[j] = VarState::Basic(r);
        }
        self.head = basic.to_vec();
        self.refactor()
    }

    pub fn basis(&self) -> &[usize] {
        &self.head
    }

    pub fn value(&self, j: usize) -> f64 {
        self.x[j]
    }

    pub fn values(&self) -> &[f64] {
        &self.x
    }

    pub fn objective(&self) -> f64 {
        self.cost.iter().zip(&self.x).map(|(c, x)| c * x).sum()
    }

    /// Row duals `y = c_B' B^-1`.
    pub fn duals(&self) -> Vec<f64> {
        let m = self.rows;
        let mut y = vec![0.0; m];
        for (i, &j) in self.head.iter().enumerate() {
            let c = self.cost[j];
            if c != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for (yk, b) in y.iter_mut().zip(row) {
                    *yk += c * b;
                }
            }
        }
        y
    }

    pub fn reduced_cost(&self, y: &[f64], j: usize) -> f64 {
        self.cost[j] - self.cols[j].iter().map(|&(r, a)| y[r] * a).sum::<f64>()
    }

    pub fn is_basic(&self, j: usize) -> bool {
        matches!(self.state[j], VarState::Basic(_))
    }

    /// Gauss-Jordan inversion of the current basis matrix.
    fn refactor(&mut self) -> Result<()> {
        let m = self.rows;
        let mut a = vec![0.0; m * m];
        for (k, &j) in self.head.iter().enumerate() {
            for &(r, v) in &self.cols[j] {
                a[r * m + k] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let (pivot_row, pivot_abs) =
                (col..m)
                    .map(|r| (r, a[r * m + col].abs()))
                    .fold(
                        (col, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if pivot_abs < 1e-11 {
                return Err(Error::Lp("singular basis matrix".into()));
            }
            if pivot_row != col {
                for k in 0..m {
                    a.swap(pivot_row * m + k, col * m + k);
                    inv.swap(pivot_row * m + k, col * m + k);
                }
            }
            let p = a[col * m + col];
            for k in 0..m {
                a[col * m + k] /= p;
                inv[col * m + k] /= p;
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = a[r * m + col];
                if f != 0.0 {
                    for k in 0..m {
                        a[r * m + k] -= f * a[col * m + k];
                        inv[r * m + k] -= f * inv[col * m + k];
                    }
                }
            }
        }
        // rows of `inv` now index basis positions because column k of B
        // belongs to head[k]
        self.binv = inv;
        self.since_refactor = 0;
        self.factored = true;
        self.compute_basic_values();
        Ok(())
    }

    fn compute_basic_values(&mut self) {
        let m = self.rows;
        let mut residual = self.rhs.clone();
        for (j, col) in self.cols.iter().enumerate() {
            if !matches!(self.state[j], VarState::Basic(_)) && self.x[j] != 0.0 {
                for &(r, a) in col {
                    residual[r] -= a * self.x[j];
                }
            }
        }
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            self.x[self.head[i]] = row.iter().zip(&residual).map(|(b, r)| b * r).sum();
        }
    }

    /// Largest violation of `Ax = b` at the current point.
    pub fn residual(&self) -> f64 {
        let mut r = self.rhs.clone();
        for (j, col) in self.cols.iter().enumerate() {
            for &(row, a) in col {
                r[row] -= a * self.x[j];
            }
        }
        r.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.rows;
        let mut out = vec![0.0; m];
        for &(r, a) in &self.cols[j] {
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.binv[i * m + r] * a;
            }
        }
        out
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64], leaving_state: VarState) -> Result<()> {
        let m = self.rows;
        let leaving = self.head[r];
        self.state[leaving] = leaving_state;
        self.x[leaving] = match leaving_state {
            VarState::Upper => self.upper[leaving],
            _ => self.lower[leaving],
        };
        self.head[r] = q;
        self.state[q] = VarState::Basic(r);

        let ar = alpha[r];
        for k in 0..m {
            self.binv[r * m + k] /= ar;
        }
        let (before, rest) = self.binv.split_at_mut(r * m);
        let (pivot_row, after) = rest.split_at_mut(m);
        for (i, row) in before.chunks_mut(m).enumerate() {
            let f = alpha[i];
            if f != 0.0 {
                for (x, p) in row.iter_mut().zip(pivot_row.iter()) {
                    *x -= f * p;
                }
            }
        }
        for (offset, row) in after.chunks_mut(m).enumerate() {
            let f = alpha[r + 1 + offset];
            if f != 0.0 {
                for (x, p) in row.iter_mut().zip(pivot_row.iter()) {
                    *x -= f * p;
                }
            }
        }

        self.since_refactor += 1;
        if self.since_refactor >= REFACTOR_INTERVAL {
            self.refactor()?;
        }
        Ok(())
    }

    fn ensure_factored(&mut self) -> Result<()> {
        if !self.factored {
            if self.head.len() != self.rows {
                return Err(Error::Lp("no starting basis installed".into()));
            }
            self.refactor()?;
        }
        Ok(())
    }

    fn primal_infeasibility(&self) -> f64 {
        self.head
            .iter()
            .map(|&j| {
                let v = self.x[j];
                (self.lower[j] - v).max(v - self.upper[j]).max(0.0)
            })
            .fold(0.0, f64::max)
    }

    /// Primal iterations from a primal feasible basis.
    pub fn primal(&mut self) -> Result<LpStatus> {
        self.ensure_factored()?;
        self.compute_basic_values();
        if self.primal_infeasibility() > CHECK_TOL {
            return Err(Error::Lp("primal iterations need a feasible basis".into()));
        }
        self.degenerate_streak = 0;
        loop {
            if self.iterations >= self.max_iterations {
                return Ok(LpStatus::IterationLimit);
            }
            let bland = self.degenerate_streak >= BLAND_STREAK;
            let y = self.duals();

            let mut entering: Option<(usize, f64, f64)> = None;
            for j in 0..self.cols.len() {
                let dir = match self.state[j] {
                    VarState::Basic(_) => continue,
                    _ if self.upper[j] - self.lower[j] <= 0.0 => continue,
                    VarState::Lower => 1.0,
                    VarState::Upper => -1.0,
                };
                let d = self.reduced_cost(&y, j);
                if d * dir < -OPT_TOL {
                    let gain = d.abs();
                    if bland {
                        entering = Some((j, dir, gain));
                        break;
                    }
                    if entering.is_none_or(|(_, _, best)| gain > best) {
                        entering = Some((j, dir, gain));
                    }
                }
            }
            let Some((q, dir, _)) = entering else {
                return Ok(LpStatus::Optimal);
            };

            let alpha = self.ftran(q);
            let flip = self.upper[q] - self.lower[q];

            // Harris two-pass ratio test.
            let mut relaxed = f64::INFINITY;
            for (i, &a) in alpha.iter().enumerate() {
                let j = self.head[i];
                let delta = dir * a;
                if delta > PIVOT_TOL {
                    relaxed = relaxed.min((self.x[j] - self.lower[j] + FEAS_TOL) / delta);
                } else if delta < -PIVOT_TOL && self.upper[j].is_finite() {
                    relaxed = relaxed.min((self.upper[j] - self.x[j] + FEAS_TOL) / -delta);
                }
            }
            let mut leaving: Option<(usize, f64, f64)> = None;
            for (i, &a) in alpha.iter().enumerate() {
                let j = self.head[i];
                let delta = dir * a;
                let t = if delta > PIVOT_TOL {
                    (self.x[j] - self.lower[j]) / delta
                } else if delta < -PIVOT_TOL && self.upper[j].is_finite() {
                    (self.upper[j] - self.x[j]) / -delta
                } else {
                    continue;
                };
                if t > relaxed {
                    continue;
                }
                let better = match leaving {
                    None => true,
                    Some((bi, _, bd)) => {
                        if bland {
                            j < self.head[bi]
                        } else {
                            delta.abs() > bd
                        }
                    }
                };
                if better {
                    leaving = Some((i, t.max(0.0), delta.abs()));
                }
            }

            self.iterations += 1;
            match leaving {
                Some((r, t, _)) if t < flip => {
                    let delta = dir * alpha[r];
                    let leaving_state = if delta > 0.0 {
                        VarState::Lower
                    } else {
                        VarState::Upper
                    };
                    self.step(q, dir * t, &alpha);
                    self.track_degeneracy(t);
                    self.pivot(r, q, &alpha, leaving_state)?;
                }
                _ if flip.is_finite() => {
                    self.step(q, dir * flip, &alpha);
                    self.state[q] = if dir > 0.0 {
                        VarState::Upper
                    } else {
                        VarState::Lower
                    };
                    self.x[q] = if dir > 0.0 {
                        self.upper[q]
                    } else {
                        self.lower[q]
                    };
                    self.track_degeneracy(flip);
                }
                _ => return Ok(LpStatus::Unbounded),
            }
        }
    }

    fn step(&mut self, q: usize, amount: f64, alpha: &[f64]) {
        if amount == 0.0 {
            return;
        }
        self.x[q] += amount;
        for (i, &a) in alpha.iter().enumerate() {
            let j = self.head[i];
            self.x[j] -= amount * a;
        }
    }

    fn track_degeneracy(&mut self, t: f64) {
        if t <= 1e-12 {
            self.degenerate_streak += 1;
        } else {
            self.degenerate_streak = 0;
        }
    }

    /// Moves nonbasic boxed columns to the bound their reduced cost prefers.
    /// Returns false when some column with an infinite upper bound prices
    /// out negative, in which case the basis is not dual feasible.
    fn restore_dual_feasibility(&mut self) -> bool {
        let y = self.duals();
        let mut feasible = true;
        for j in 0..self.cols.len() {
            if matches!(self.state[j], VarState::Basic(_)) {
                continue;
            }
            let d = self.reduced_cost(&y, j);
            match self.state[j] {
                VarState::Lower if d < -OPT_TOL => {
                    if self.upper[j].is_finite() {
                        self.state[j] = VarState::Upper;
                        self.x[j] = self.upper[j];
                    } else {
                        feasible = false;
                    }
                }
                VarState::Upper if d > OPT_TOL => {
                    self.state[j] = VarState::Lower;
                    self.x[j] = self.lower[j];
                }
                _ => {}
            }
        }
        self.compute_basic_values();
        feasible
    }

    /// Dual iterations from a dual feasible basis.
    pub fn dual(&mut self) -> Result<LpStatus> {
        self.ensure_factored()?;
        if !self.restore_dual_feasibility() {
            return Err(Error::Lp(
                "dual iterations need a dual feasible basis".into(),
            ));
        }
        self.degenerate_streak = 0;
        let m = self.rows;
        loop {
            if self.iterations >= self.max_iterations {
                return Ok(LpStatus::IterationLimit);
            }
            let bland = self.degenerate_streak >= BLAND_STREAK;

            let mut leaving: Option<(usize, f64)> = None;
            for (i, &j) in self.head.iter().enumerate() {
                let v = self.x[j];
                let excess = if v < self.lower[j] - FEAS_TOL {
                    v - self.lower[j]
                } else if v > self.upper[j] + FEAS_TOL {
                    v - self.upper[j]
                } else {
                    continue;
                };
                let better = match leaving {
                    None => true,
                    Some((bi, be)) => {
                        if bland {
                            j < self.head[bi]
                        } else {
                            excess.abs() > be.abs()
                        }
                    }
                };
                if better {
                    leaving = Some((i, excess));
                }
            }
            let Some((r, excess)) = leaving else {
                return Ok(LpStatus::Optimal);
            };

            let y = self.duals();
            let rho = self.binv[r * m..(r + 1) * m].to_vec();
            let below = excess < 0.0;
            let mut entering: Option<(usize, f64, f64)> = None;
            for j in 0..self.cols.len() {
                let state = self.state[j];
                if matches!(state, VarState::Basic(_)) || self.upper[j] - self.lower[j] <= 0.0 {
                    continue;
                }
                let a: f64 = self.cols[j].iter().map(|&(row, v)| rho[row] * v).sum();
                let eligible = match (state, below) {
                    (VarState::Lower, true) => a < -PIVOT_TOL,
                    (VarState::Upper, true) => a > PIVOT_TOL,
                    (VarState::Lower, false) => a > PIVOT_TOL,
                    (VarState::Upper, false) => a < -PIVOT_TOL,
                    _ => false,
                };
                if !eligible {
                    continue;
                }
                let d = self.reduced_cost(&y, j);
                let ratio = d.abs() / a.abs();
                let better = match entering {
                    None => true,
                    Some((bj, br, ba)) => {
                        if bland {
                            ratio < br - 1e-12 || (ratio <= br + 1e-12 && j < bj)
                        } else {
                            ratio < br - 1e-12 || (ratio <= br + 1e-12 && a.abs() > ba)
                        }
                    }
                };
                if better {
                    entering = Some((j, ratio, a.abs()));
                }
            }
            let Some((q, ratio, _)) = entering else {
                return Ok(LpStatus::Infeasible);
            };

            let alpha = self.ftran(q);
            if alpha[r].abs() <= PIVOT_TOL {
                self.refactor()?;
                continue;
            }
            let theta = excess / alpha[r];
            self.iterations += 1;
            self.step(q, theta, &alpha);
            self.track_degeneracy(ratio);
            let leaving_state = if below {
                VarState::Lower
            } else {
                VarState::Upper
            };
            self.pivot(r, q, &alpha, leaving_state)?;
        }
    }

    /// Reoptimizes from the current basis, choosing dual iterations when
    /// the basis is primal infeasible, and polishing with primal iterations.
    pub fn solve(&mut self) -> Result<LpStatus> {
        self.ensure_factored()?;
        for _attempt in 0..3 {
            self.compute_basic_values();
            let status = if self.primal_infeasibility() > FEAS_TOL {
                match self.dual()? {
                    LpStatus::Optimal => self.primal()?,
                    other => return Ok(other),
                }
            } else {
                self.primal()?
            };
            if status != LpStatus::Optimal {
                return Ok(status);
            }
            if self.residual() <= DRIFT_TOL && self.primal_infeasibility() <= CHECK_TOL {
                return Ok(status);
            }
            self.refactor()?;
        }
        Err(Error::Lp(
            "numerical drift persists after refactorization".into(),
        ))
    }
}
