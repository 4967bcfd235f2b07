#![allow(dead_code)]

use mdcolgen::{DualSolution, Graph};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn gnp<R: Rng>(rng: &mut R, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

/// Uniform-ish random d-regular graph by the pairing model with restarts.
pub fn random_regular<R: Rng>(rng: &mut R, n: usize, d: usize) -> Graph {
    assert!(d < n && (n * d).is_multiple_of(2));
    'retry: loop {
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        stubs.shuffle(rng);
        let mut seen = std::collections::HashSet::new();
        let mut edges = Vec::new();
        for pair in stubs.chunks(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'retry;
            }
            edges.push((u, v));
        }
        return Graph::from_edges(n, edges).unwrap();
    }
}

pub fn circulant(n: usize, offsets: &[usize]) -> Graph {
    let mut edges = Vec::new();
    for v in 0..n {
        for &d in offsets {
            edges.push((v, (v + d) % n));
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

pub fn complete(n: usize) -> Graph {
    Graph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).unwrap()
}

pub fn random_duals<R: Rng>(rng: &mut R, n: usize, range: f64) -> DualSolution {
    DualSolution::new((0..n).map(|_| rng.gen_range(-range..=range)).collect()).unwrap()
}

pub fn random_labels<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let k = rng.gen_range(1..=n);
    (0..n).map(|_| rng.gen_range(0..k)).collect()
}
