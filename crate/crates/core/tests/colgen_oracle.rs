mod common;

use common::{complete, gnp};
use mdcolgen::colgen::integer_restricted_master;
use mdcolgen::lp::Column;
use mdcolgen::oracles::{brute_force_densest, brute_force_partition_opt};
use mdcolgen::peeling::peel_pricing;
use mdcolgen::{
    cluster_contribution, modularity_density, peel_densest, pricing_objective, run_colgen,
    ColGenConfig, DualSolution, Graph, PeelConfig, PrimalStatus, SolveStatus, VertexSet,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn density(g: &Graph, s: &VertexSet) -> f64 {
    g.induced_edge_count(s).unwrap() as f64 / s.len() as f64
}

#[test]
fn colgen_against_partition_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let cfg = ColGenConfig::default();
    let mut integral = 0;
    for case in 0..60 {
        let n = rng.gen_range(1..=9);
        let p = [0.2, 0.5, 0.8][case % 3];
        let g = gnp(&mut rng, n, p);
        let (best, _) = brute_force_partition_opt(&g, 1).unwrap();
        let r = run_colgen(&g, &cfg).unwrap();
        assert_eq!(r.status, SolveStatus::DualOptimal);
        assert!(r.certificate);
        assert!(r.dual_objective >= best - 1e-6, "case {case}: weak duality");
        let d = r.modularity_density.unwrap();
        assert!((d - modularity_density(&g, r.partition.as_ref().unwrap()).unwrap()).abs() < 1e-12);
        assert!(d <= best + 1e-9);
        if r.primal_status == PrimalStatus::Integral {
            integral += 1;
            assert!((d - best).abs() <= 1e-6, "case {case}: {d} vs {best}");
        }
        let objectives: Vec<f64> = r.iterations.iter().map(|it| it.master_objective).collect();
        assert!(objectives.windows(2).all(|w| w[1] >= w[0] - 1e-9));
        for it in &r.iterations {
            assert!(it.columns_added > 0);
            assert!(it.min_violation.unwrap() > cfg.epsilon);
        }
    }
    assert!(integral > 0);
}

#[test]
fn certified_duals_satisfy_every_subset_constraint() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let cfg = ColGenConfig::default();
    for _ in 0..15 {
        let n = rng.gen_range(2..=12);
        let p = rng.gen_range(0.2..0.8);
        let g = gnp(&mut rng, n, p);
        let r = run_colgen(&g, &cfg).unwrap();
        assert!(r.certificate);
        for mask in 1u64..(1 << n) {
            let s = VertexSet::from_mask(mask);
            assert!(pricing_objective(&g, &s, &r.duals).unwrap() <= cfg.epsilon + 1e-9);
        }
    }
}

#[test]
fn disconnected_graph_splits_components() {
    let g = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
    let r = run_colgen(&g, &ColGenConfig::default()).unwrap();
    assert!(r.proved_optimal());
    assert!((r.modularity_density.unwrap() - 4.0).abs() < 1e-9);
    assert_eq!(r.partition.unwrap().len(), 2);
}

#[test]
fn complete_graph_is_one_cluster() {
    for n in [2, 5, 8] {
        let r = run_colgen(&complete(n), &ColGenConfig::default()).unwrap();
        assert!(r.proved_optimal());
        assert!((r.modularity_density.unwrap() - (n - 1) as f64).abs() < 1e-9);
    }
}

#[test]
fn sequential_and_parallel_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..10 {
        let g = gnp(&mut rng, 9, 0.4);
        let a = run_colgen(&g, &ColGenConfig::default()).unwrap();
        let b = run_colgen(
            &g,
            &ColGenConfig {
                parallel: false,
                ..ColGenConfig::default()
            },
        )
        .unwrap();
        assert_eq!(a.columns, b.columns);
        assert_eq!(a.partition, b.partition);
        assert_eq!(a.dual_objective, b.dual_objective);
    }
}

#[test]
fn integer_master_over_all_subsets_is_the_partition_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..40 {
        let n = rng.gen_range(1..=7);
        let p = rng.gen_range(0.1..0.9);
        let g = gnp(&mut rng, n, p);
        let mut columns = Column::singletons(&g);
        for mask in 1u64..(1 << n) {
            if mask.count_ones() > 1 {
                columns.push(Column::new(&g, VertexSet::from_mask(mask)).unwrap());
            }
        }
        let part = integer_restricted_master(&columns, n).unwrap();
        let (best, _) = brute_force_partition_opt(&g, 1).unwrap();
        assert!((modularity_density(&g, &part).unwrap() - best).abs() <= 1e-9);
    }
}

#[test]
fn peeling_is_a_half_approximation_on_known_graphs() {
    for n in 2..=10 {
        let g = complete(n);
        let s = peel_densest(&g).unwrap();
        assert_eq!(density(&g, &s), brute_force_densest(&g).unwrap().0);
    }
    let pendant =
        Graph::from_edges(5, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (3, 4)]).unwrap();
    assert_eq!(density(&pendant, &peel_densest(&pendant).unwrap()), 1.5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn peeling_half_approximation(seed: u64, n in 1usize..=14, p in 0.05f64..0.95) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = gnp(&mut rng, n, p);
        let (best, _) = brute_force_densest(&g).unwrap();
        let s = peel_densest(&g).unwrap();
        prop_assert!(density(&g, &s) >= 0.5 * best - 1e-12);
    }

    #[test]
    fn peel_pricing_sets_are_violated(seed: u64, n in 2usize..=14, p in 0.05f64..0.95, scale in 0.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = gnp(&mut rng, n, p);
        let lam = DualSolution::new((0..n).map(|_| rng.gen_range(-scale..=scale)).collect()).unwrap();
        let cfg = PeelConfig::default();
        let sets = peel_pricing(&g, &lam, &cfg, None).unwrap();
        let again = peel_pricing(&g, &lam, &cfg, None).unwrap();
        prop_assert_eq!(&sets, &again);
        let mut seen = std::collections::HashSet::new();
        for s in &sets {
            prop_assert!(s.len() >= 2);
            prop_assert!(seen.insert(s.clone()));
            prop_assert!(cluster_contribution(&g, s).unwrap() - lam.sum_over(s) > cfg.epsilon);
        }
    }
}
