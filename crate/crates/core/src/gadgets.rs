//! Instance generators for the two hardness reductions.
//!
//! The max-cut gadget blows a 3-regular graph up into two blocks `I_v`,
//! `I'_v` of size `M` per vertex, wires them into an `(M-1)`-regular graph
//! `G*`, and hands out its complement. A cut `{X, Y}` of value `w` maps to
//! the two-cluster partition `C = U_{v in X} I_v  u  U_{v in Y} I'_v`, whose
//! modularity density on the complement is `2M - 4 - 12/M + 8w/(Mn)`.
//! With `M = n^3` the threshold `r*` (the same expression at `w = k`) is
//! reached by some partition with at least two clusters exactly when the
//! source has a cut of value `k`; restricted to two clusters the objective
//! coincides with uniform sparsest cut.
//!
//! The clique gadget keeps an `(n-4)`-regular graph and sets every dual
//! to `2(k-1)/k`; a set reaches pricing objective `-(n-4)` iff the graph has
//! a `k`-clique.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::objective::{DualSolution, Partition};

/// Position of a gadget vertex: source vertex, block, offset in the block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub source: usize,
    pub primed: bool,
    pub offset: usize,
}

#[derive(Clone, Debug)]
pub struct MdGadget {
    pub source: Graph,
    pub block_size: usize,
    pub k: usize,
    pub g_star: Graph,
    pub complement_g_star: Graph,
    pub r_star: Ratio<i128>,
    /// False when the block size differs from `n^3`.
    pub certifying: bool,
}

impl MdGadget {
    pub fn vertex(&self, block: Block) -> usize {
        gadget_vertex(self.block_size, block)
    }

    pub fn block(&self, v: usize) -> Block {
        let m = self.block_size;
        Block {
            source: v / (2 * m),
            primed: v % (2 * m) >= m,
            offset: v % m,
        }
    }

    pub fn r_star_f64(&self) -> f64 {
        ratio_to_f64(self.r_star)
    }

    /// `2M - 4 - 12/M + 8w/(Mn)`.
    pub fn cut_density(&self, cut_value: usize) -> Ratio<i128> {
        md_threshold(self.block_size, self.source.n(), cut_value)
    }

    pub fn metadata(&self) -> GadgetMetadata {
        GadgetMetadata {
            kind: "md".into(),
            source_n: self.source.n(),
            source_m: self.source.m(),
            k: self.k,
            block_size: Some(self.block_size),
            vertices: self.complement_g_star.n(),
            edges: self.complement_g_star.m(),
            regular_degree: self.complement_g_star.regular_degree(),
            r_star: self.r_star_f64(),
            r_star_exact: format!("{}", self.r_star),
            lambda: None,
            certifying: self.certifying,
            stamp: stamp(self.certifying).into(),
        }
    }
}

fn gadget_vertex(m: usize, b: Block) -> usize {
    b.source * 2 * m + if b.primed { m } else { 0 } + b.offset
}

fn stamp(certifying: bool) -> &'static str {
    if certifying {
        "certifying"
    } else {
        "non-certifying"
    }
}

pub fn ratio_to_f64(r: Ratio<i128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `2M - 4 - 12/M + 8w/(Mn)` as an exact rational.
pub fn md_threshold(m: usize, n: usize, w: usize) -> Ratio<i128> {
    let (m, n, w) = (m as i128, n as i128, w as i128);
    Ratio::from_integer(2 * m - 4) - Ratio::new(12, m) + Ratio::new(8 * w, m * n)
}

/// Builds the max-cut gadget. `block_override` replaces `M = n^3`; it must
/// be at least 5 and marks the result non-certifying.
pub fn build_md_gadget(g: &Graph, k: usize, block_override: Option<usize>) -> Result<MdGadget> {
    let n = g.n();
    if g.regular_degree() != Some(3) {
        return Err(invalid("max-cut gadget needs a 3-regular source graph"));
    }
    if n < 4 {
        return Err(invalid(format!(
            "source has {n} vertices; at least 4 required"
        )));
    }
    if k == 0 {
        return Err(invalid("target cut value must be positive"));
    }
    let natural = n.pow(3);
    let m = block_override.unwrap_or(natural);
    if m < 5 {
        return Err(invalid(format!("block size {m} is below 5")));
    }
    let certifying = m == natural;
    if !certifying {
        log::warn!("block size {m} differs from n^3 = {natural}; the gadget is non-certifying");
    }

    let at = |source, primed, offset| {
        gadget_vertex(
            m,
            Block {
                source,
                primed,
                offset,
            },
        )
    };
    let mut edges = Vec::new();
    for (u, v) in g.edges() {
        edges.push((at(u, false, 0), at(v, false, 0)));
        edges.push((at(u, true, 0), at(v, true, 0)));
    }
    for v in 0..n {
        for j in 4..m {
            edges.push((at(v, false, 0), at(v, true, j)));
        }
        for i in 1..4 {
            for j in 1..m {
                edges.push((at(v, false, i), at(v, true, j)));
            }
        }
        for i in 4..m {
            for j in (0..m).filter(|&j| j != i) {
                edges.push((at(v, false, i), at(v, true, j)));
            }
        }
    }
    let labels = (0..2 * m * n)
        .map(|id| {
            let source = id / (2 * m);
            let prime = if id % (2 * m) >= m { "'" } else { "" };
            format!("{}{}_{}", g.label(source), prime, id % m)
        })
        .collect();
    let g_star = Graph::from_edges(2 * m * n, edges)?.with_labels(labels)?;
    let complement_g_star = g_star.complement();

    let gadget = MdGadget {
        source: g.clone(),
        block_size: m,
        k,
        r_star: md_threshold(m, n, k),
        g_star,
        complement_g_star,
        certifying,
    };
    audit_md_gadget(&gadget)?;
    Ok(gadget)
}

/// Degree and wiring audit of a freshly built gadget.
fn audit_md_gadget(gadget: &MdGadget) -> Result<()> {
    let (m, n) = (gadget.block_size, gadget.source.n());
    let fail = |what: String| Err(Error::Internal(format!("max-cut gadget: {what}")));
    if gadget.g_star.n() != 2 * m * n {
        return fail(format!(
            "{} vertices, expected {}",
            gadget.g_star.n(),
            2 * m * n
        ));
    }
    if gadget.g_star.regular_degree() != Some(m - 1) {
        return fail("G* is not (M-1)-regular".into());
    }
    if gadget.complement_g_star.regular_degree() != Some(2 * m * n - m) {
        return fail("complement is not (2Mn-M)-regular".into());
    }
    for v in 0..n {
        let cross = block_cross_edges(gadget, v);
        if cross != m * m - m - 3 {
            return fail(format!("{cross} edges between I_{v} and I'_{v}"));
        }
    }
    Ok(())
}

/// Number of `G*` edges joining `I_v` and `I'_v`.
pub fn block_cross_edges(gadget: &MdGadget, v: usize) -> usize {
    (0..gadget.block_size)
        .map(|i| {
            let a = gadget.vertex(Block {
                source: v,
                primed: false,
                offset: i,
            });
            gadget
                .g_star
                .neighbors(a)
                .iter()
                .filter(|&&b| {
                    let block = gadget.block(b);
                    block.source == v && block.primed
                })
                .count()
        })
        .sum()
}

/// The two-cluster partition of the gadget induced by the source cut
/// `{X, V\X}`.
pub fn cut_to_partition(gadget: &MdGadget, x: &VertexSet) -> Result<Partition> {
    let n = gadget.source.n();
    if x.is_empty() || x.len() >= n || x.members().last().is_some_and(|&v| v >= n) {
        return Err(invalid(
            "X must be a nonempty proper subset of the source vertices",
        ));
    }
    let m = gadget.block_size;
    let mut inside = Vec::with_capacity(m * n);
    for v in 0..n {
        let primed = !x.contains(v);
        inside.extend((0..m).map(|offset| {
            gadget.vertex(Block {
                source: v,
                primed,
                offset,
            })
        }));
    }
    let inside = VertexSet::new(inside);
    let mask = inside.mask(2 * m * n);
    let outside: VertexSet = (0..2 * m * n).filter(|&v| !mask[v]).collect();
    Partition::new(2 * m * n, vec![inside, outside])
}

/// Modularity density as an exact rational.
pub fn exact_modularity_density(g: &Graph, p: &Partition) -> Result<Ratio<i128>> {
    let mut total = Ratio::from_integer(0i128);
    for cluster in p.clusters() {
        let inner = g.induced_edge_count(cluster)? as i128;
        let cut = g.cut_size(cluster)? as i128;
        total += Ratio::new(2 * inner - cut, cluster.len() as i128);
    }
    Ok(total)
}

#[derive(Clone, Debug)]
pub struct ApGadget {
    pub graph: Graph,
    pub k: usize,
    pub lambda: DualSolution,
    pub lambda_exact: Ratio<i128>,
    pub r_star: i64,
}

impl ApGadget {
    pub fn metadata(&self) -> GadgetMetadata {
        GadgetMetadata {
            kind: "ap".into(),
            source_n: self.graph.n(),
            source_m: self.graph.m(),
            k: self.k,
            block_size: None,
            vertices: self.graph.n(),
            edges: self.graph.m(),
            regular_degree: self.graph.regular_degree(),
            r_star: self.r_star as f64,
            r_star_exact: self.r_star.to_string(),
            lambda: Some(ratio_to_f64(self.lambda_exact)),
            certifying: true,
            stamp: stamp(true).into(),
        }
    }
}

/// Pricing instance from an `(n-4)`-regular graph and a clique size `k`.
pub fn build_ap_gadget(g: &Graph, k: usize) -> Result<ApGadget> {
    let n = g.n();
    if n < 4 || g.regular_degree() != Some(n - 4) {
        return Err(invalid(format!(
            "clique gadget needs an (n-4)-regular graph; n = {n}, degrees {:?}",
            g.regular_degree()
        )));
    }
    if k < 2 {
        return Err(invalid("clique size must be at least 2"));
    }
    let lambda_exact = Ratio::new(2 * (k as i128 - 1), k as i128);
    Ok(ApGadget {
        graph: g.clone(),
        k,
        lambda: DualSolution::constant(n, ratio_to_f64(lambda_exact)),
        lambda_exact,
        r_star: -(n as i64 - 4),
    })
}

/// Exact pricing objective `c(S) - lambda(S)` of a set on the clique gadget.
pub fn ap_objective_exact(gadget: &ApGadget, s: &VertexSet) -> Result<Ratio<i128>> {
    if s.is_empty() {
        return Err(invalid("empty set"));
    }
    let inner = gadget.graph.induced_edge_count(s)? as i128;
    let cut = gadget.graph.cut_size(s)? as i128;
    let size = s.len() as i128;
    Ok(Ratio::new(2 * inner - cut, size) - gadget.lambda_exact * size)
}

/// Metadata written next to an emitted gadget edge list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GadgetMetadata {
    pub kind: String,
    pub source_n: usize,
    pub source_m: usize,
    pub k: usize,
    pub block_size: Option<usize>,
    pub vertices: usize,
    pub edges: usize,
    pub regular_degree: Option<usize>,
    pub r_star: f64,
    pub r_star_exact: String,
    pub lambda: Option<f64>,
    pub certifying: bool,
    pub stamp: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Graph::from_edges(n, edges).unwrap()
    }

    fn k33() -> Graph {
        Graph::from_edges(6, (0..3).flat_map(|u| (3..6).map(move |v| (u, v)))).unwrap()
    }

    fn circulant(n: usize, jumps: &[usize]) -> Graph {
        let mut edges = Vec::new();
        for i in 0..n {
            for &j in jumps {
                edges.push((i, (i + j) % n));
            }
        }
        Graph::from_edges(n, edges).unwrap()
    }

    #[test]
    fn k4_full_size() {
        let gadget = build_md_gadget(&complete(4), 4, None).unwrap();
        assert_eq!(gadget.block_size, 64);
        assert_eq!(gadget.g_star.n(), 512);
        assert_eq!(gadget.g_star.regular_degree(), Some(63));
        assert_eq!(gadget.r_star, Ratio::new(123_9375, 10_000));
        assert_eq!(gadget.r_star_f64(), 123.9375);
        assert!(gadget.certifying);
    }

    #[test]
    fn k4_small_override() {
        let gadget = build_md_gadget(&complete(4), 4, Some(8)).unwrap();
        assert_eq!(gadget.g_star.n(), 64);
        assert_eq!(gadget.g_star.regular_degree(), Some(7));
        for v in 0..4 {
            assert_eq!(block_cross_edges(&gadget, v), 53);
        }
        assert_eq!(gadget.complement_g_star.regular_degree(), Some(56));
        assert!(!gadget.certifying);
        assert_eq!(gadget.metadata().stamp, "non-certifying");
    }

    #[test]
    fn k33_full_size() {
        let gadget = build_md_gadget(&k33(), 9, None).unwrap();
        assert_eq!(gadget.g_star.n(), 2592);
        assert!(gadget.certifying);
    }

    #[test]
    fn md_preconditions() {
        assert!(build_md_gadget(&complete(5), 1, Some(8)).is_err());
        assert!(build_md_gadget(&complete(4), 1, Some(4)).is_err());
        assert!(build_md_gadget(&complete(4), 0, Some(8)).is_err());
    }

    #[test]
    fn block_addressing() {
        let gadget = build_md_gadget(&complete(4), 4, Some(6)).unwrap();
        for v in 0..gadget.g_star.n() {
            assert_eq!(gadget.vertex(gadget.block(v)), v);
        }
    }

    #[test]
    fn cut_partition_shape() {
        let gadget = build_md_gadget(&complete(4), 4, None).unwrap();
        let x = VertexSet::new(vec![0, 1]);
        let p = cut_to_partition(&gadget, &x).unwrap();
        assert_eq!(
            p.clusters().iter().map(VertexSet::len).collect::<Vec<_>>(),
            vec![256, 256]
        );
        let d = exact_modularity_density(&gadget.complement_g_star, &p).unwrap();
        assert_eq!(d, gadget.cut_density(4));
        let swapped = cut_to_partition(&gadget, &VertexSet::new(vec![2, 3])).unwrap();
        assert_eq!(
            exact_modularity_density(&gadget.complement_g_star, &swapped).unwrap(),
            d
        );
        assert!(cut_to_partition(&gadget, &VertexSet::default()).is_err());
        assert!(cut_to_partition(&gadget, &VertexSet::new(vec![0, 1, 2, 3])).is_err());
    }

    #[test]
    fn ap_gadget_values() {
        let g = circulant(8, &[1, 2]);
        let gadget = build_ap_gadget(&g, 3).unwrap();
        assert_eq!(gadget.lambda_exact, Ratio::new(4, 3));
        assert_eq!(gadget.r_star, -4);
        let triangle = VertexSet::new(vec![0, 1, 2]);
        assert_eq!(
            ap_objective_exact(&gadget, &triangle).unwrap(),
            Ratio::from_integer(-4)
        );
        assert_eq!(gadget.metadata().lambda, Some(4.0 / 3.0));
    }

    #[test]
    fn ap_gadget_rejects_wrong_degree() {
        let mut edges = Vec::new();
        for u in 0..6 {
            for v in u + 1..6 {
                if v != u + 3 {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::from_edges(6, edges).unwrap();
        assert_eq!(g.regular_degree(), Some(4));
        assert!(build_ap_gadget(&g, 3).is_err());
        assert!(build_ap_gadget(&circulant(8, &[1, 2]), 1).is_err());
    }
}
