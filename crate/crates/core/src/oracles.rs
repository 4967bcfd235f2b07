//! Exhaustive reference solvers. Each one refuses instances above a hard
//! size limit instead of running for hours.

use crate::error::{invalid, Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::objective::{DualSolution, Partition};

pub const PARTITION_LIMIT: usize = 12;
pub const MAX_CUT_LIMIT: usize = 24;
pub const SUBSET_LIMIT: usize = 20;

const TIE: f64 = 1e-9;

fn guard(g: &Graph, limit: usize) -> Result<()> {
    if g.n() > limit {
        return Err(Error::TooLarge { n: g.n(), limit });
    }
    Ok(())
}

pub(crate) fn adjacency_masks(g: &Graph) -> Vec<u64> {
    (0..g.n())
        .map(|v| g.neighbors(v).iter().fold(0u64, |m, &u| m | 1 << u))
        .collect()
}

fn inner_edges(adj: &[u64], mask: u64) -> u32 {
    let mut twice = 0;
    let mut rest = mask;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        twice += (adj[v] & mask).count_ones();
    }
    twice / 2
}

fn volume(adj: &[u64], mask: u64) -> u32 {
    let mut total = 0;
    let mut rest = mask;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        total += adj[v].count_ones();
    }
    total
}

/// Best partition by modularity density among those with at least
/// `min_clusters` clusters.
///
/// Partitions are visited as restricted-growth strings; among values within
/// `1e-9` of each other the one with fewer clusters wins, then the earlier
/// string.
pub fn brute_force_partition_opt(g: &Graph, min_clusters: usize) -> Result<(f64, Partition)> {
    guard(g, PARTITION_LIMIT)?;
    let n = g.n();
    if n == 0 {
        return Err(invalid("empty graph"));
    }
    if min_clusters == 0 || min_clusters > n {
        return Err(invalid(format!(
            "min_clusters = {min_clusters} is not in 1..={n}"
        )));
    }
    let adj = adjacency_masks(g);
    let contribution: Vec<f64> = (0..1u64 << n)
        .map(|mask| {
            if mask == 0 {
                return 0.0;
            }
            let num = 4 * inner_edges(&adj, mask) as i64 - volume(&adj, mask) as i64;
            num as f64 / mask.count_ones() as f64
        })
        .collect();

    struct Search<'a> {
        n: usize,
        min_clusters: usize,
        contribution: &'a [f64],
        labels: Vec<usize>,
        masks: Vec<u64>,
        best: Option<(f64, usize, Vec<usize>)>,
    }

    impl Search<'_> {
        fn visit(&mut self, v: usize) {
            if v == self.n {
                let k = self.masks.len();
                if k < self.min_clusters {
                    return;
                }
                let value: f64 = self
                    .masks
                    .iter()
                    .map(|&m| self.contribution[m as usize])
                    .sum();
                let better = match &self.best {
                    None => true,
                    Some((best, best_k, _)) => {
                        value > best + TIE || ((value - best).abs() <= TIE && k < *best_k)
                    }
                };
                if better {
                    self.best = Some((value, k, self.labels.clone()));
                }
                return;
            }
            let open = self.masks.len();
            for c in 0..=open {
                if c == open {
                    self.masks.push(0);
                }
                self.masks[c] |= 1 << v;
                self.labels[v] = c;
                self.visit(v + 1);
                self.masks[c] &= !(1 << v);
                if c == open {
                    self.masks.pop();
                }
            }
        }
    }

    let mut search = Search {
        n,
        min_clusters,
        contribution: &contribution,
        labels: vec![0; n],
        masks: Vec::new(),
        best: None,
    };
    search.visit(0);
    let (value, _, labels) = search.best.expect("at least one partition qualifies");
    Ok((value, Partition::from_labels(&labels)?))
}

/// Maximum number of edges crossing a bipartition into two nonempty sides.
pub fn brute_force_max_cut(g: &Graph) -> Result<(usize, (VertexSet, VertexSet))> {
    guard(g, MAX_CUT_LIMIT)?;
    let n = g.n();
    if n < 2 {
        return Err(invalid("a cut needs at least two vertices"));
    }
    let adj = adjacency_masks(g);
    let full = (1u64 << n) - 1;
    let mut best = (0u32, 0u64);
    // the last vertex always sits on the Y side
    for x in 1..1u64 << (n - 1) {
        let y = full & !x;
        let mut value = 0;
        let mut rest = x;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            value += (adj[v] & y).count_ones();
        }
        if value > best.0 || best.1 == 0 {
            best = (value, x);
        }
    }
    let x = best.1;
    Ok((
        best.0 as usize,
        (VertexSet::from_mask(x), VertexSet::from_mask(full & !x)),
    ))
}

/// Densest subgraph `max |E(S)|/|S|`; ties go to the larger set, then the
/// lexicographically smaller one.
pub fn brute_force_densest(g: &Graph) -> Result<(f64, VertexSet)> {
    guard(g, SUBSET_LIMIT)?;
    if g.n() == 0 {
        return Err(invalid("empty graph"));
    }
    let adj = adjacency_masks(g);
    let mut best: Option<(u64, u64, VertexSet)> = None;
    for mask in 1..1u64 << g.n() {
        let edges = inner_edges(&adj, mask) as u64;
        let size = mask.count_ones() as u64;
        let set = VertexSet::from_mask(mask);
        let better = match &best {
            None => true,
            Some((be, bs, bset)) => {
                let lhs = edges * bs;
                let rhs = be * size;
                lhs > rhs || (lhs == rhs && (size > *bs || (size == *bs && set < *bset)))
            }
        };
        if better {
            best = Some((edges, size, set));
        }
    }
    let (edges, size, set) = best.expect("nonempty graph");
    Ok((edges as f64 / size as f64, set))
}

/// `min over nonempty S of lambda(S) - c(S)` by direct evaluation of every
/// subset.
pub fn brute_force_pricing(g: &Graph, lam: &DualSolution) -> Result<(f64, VertexSet)> {
    guard(g, SUBSET_LIMIT)?;
    if lam.len() != g.n() {
        return Err(invalid("dual vector length differs from n"));
    }
    if g.n() == 0 {
        return Err(invalid("empty graph"));
    }
    let adj = adjacency_masks(g);
    let mut best = (f64::INFINITY, 0u64);
    for mask in 1..1u64 << g.n() {
        let num = 4 * inner_edges(&adj, mask) as i64 - volume(&adj, mask) as i64;
        let c = num as f64 / mask.count_ones() as f64;
        let mut dual = 0.0;
        let mut rest = mask;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            dual += lam[v];
        }
        let value = dual - c;
        if value < best.0 {
            best = (value, mask);
        }
    }
    Ok((best.0, VertexSet::from_mask(best.1)))
}

/// Whether `g` has a clique on `k` vertices.
pub fn brute_force_has_clique(g: &Graph, k: usize) -> Result<bool> {
    guard(g, SUBSET_LIMIT)?;
    if k == 0 {
        return Ok(true);
    }
    let adj = adjacency_masks(g);
    fn extend(adj: &[u64], candidates: u64, need: usize) -> bool {
        if need == 0 {
            return true;
        }
        if (candidates.count_ones() as usize) < need {
            return false;
        }
        let mut rest = candidates;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if extend(adj, rest & adj[v], need - 1) {
                return true;
            }
        }
        false
    }
    let all = if g.n() == 64 {
        u64::MAX
    } else {
        (1u64 << g.n()) - 1
    };
    Ok(extend(&adj, all, k))
}

/// Size of the largest clique.
pub fn brute_force_clique_number(g: &Graph) -> Result<usize> {
    let mut k = 0;
    while k < g.n() && brute_force_has_clique(g, k + 1)? {
        k += 1;
    }
    Ok(k)
}
