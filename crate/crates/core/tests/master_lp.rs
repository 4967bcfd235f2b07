mod common;

use common::gnp;
use mdcolgen::lp::{solve_restricted_master, Column, MasterLp, SimplexMaster};
use mdcolgen::VertexSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Solves `a x = b` by Gaussian elimination; `None` when singular.
fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in 0..n {
            if row != col {
                let f = a[row][col] / a[col][col];
                let pivot_row = a[col].clone();
                for (x, p) in a[row].iter_mut().zip(&pivot_row).skip(col) {
                    *x -= f * p;
                }
                b[row] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if m < k {
        return Vec::new();
    }
    let mut out = combinations(m - 1, k);
    for mut c in combinations(m - 1, k - 1) {
        c.push(m - 1);
        out.push(c);
    }
    out
}

/// Optimum of `max c z, A z = 1, z >= 0` over every basic feasible solution.
fn vertex_enumeration(columns: &[Column], n: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for basis in combinations(columns.len(), n) {
        let a: Vec<Vec<f64>> = (0..n)
            .map(|v| {
                basis
                    .iter()
                    .map(|&j| columns[j].set.contains(v) as u8 as f64)
                    .collect()
            })
            .collect();
        let Some(z) = gauss(a, vec![1.0; n]) else {
            continue;
        };
        if z.iter().all(|&x| x >= -1e-10) {
            let value: f64 = basis
                .iter()
                .zip(&z)
                .map(|(&j, x)| columns[j].contribution * x)
                .sum();
            best = best.max(value);
        }
    }
    best
}

fn random_columns(rng: &mut ChaCha8Rng) -> (usize, Vec<Column>) {
    let n = rng.gen_range(2..=6);
    let density = rng.gen_range(0.2..0.9);
    let g = gnp(rng, n, density);
    let mut columns = Column::singletons(&g);
    let extra = rng.gen_range(0..=12 - n);
    while columns.len() < n + extra {
        let set: VertexSet = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        if set.len() >= 2 && columns.iter().all(|c| c.set != set) {
            columns.push(Column::new(&g, set).unwrap());
        }
        if columns.len() >= (1 << n) - 1 {
            break;
        }
    }
    (n, columns)
}

#[test]
fn simplex_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..300 {
        let (n, columns) = random_columns(&mut rng);
        let expected = vertex_enumeration(&columns, n);
        let sol = solve_restricted_master(n, columns.clone()).unwrap();
        assert!(
            (sol.objective - expected).abs() <= 1e-8,
            "case {case}: {} vs {expected}",
            sol.objective
        );
        assert!((sol.duals.sum() - sol.objective).abs() <= 1e-8);
        for c in &columns {
            assert!(
                sol.duals.sum_over(&c.set) >= c.contribution - 1e-8,
                "case {case}: dual infeasible"
            );
        }
        for v in 0..n {
            let cover: f64 = columns
                .iter()
                .zip(&sol.primal)
                .filter(|(c, _)| c.set.contains(v))
                .map(|(_, z)| z)
                .sum();
            assert!((cover - 1.0).abs() <= 1e-8);
        }
    }
}

#[test]
fn warm_start_agrees_with_cold_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let (n, columns) = random_columns(&mut rng);
        let mut master = SimplexMaster::new(n, columns[..n].to_vec()).unwrap();
        let mut last = master.solve().unwrap().objective;
        for chunk in columns[n..].chunks(2) {
            master.append_columns(chunk.to_vec()).unwrap();
            let now = master.solve().unwrap().objective;
            assert!(now >= last - 1e-9);
            last = now;
        }
        let cold = solve_restricted_master(n, columns).unwrap().objective;
        assert!((last - cold).abs() <= 1e-8);
    }
}
