use proptest::prelude::*;
use skewspec::graph::{sample_graph, skew_adjacency, GraphParams, OrientedGraph, SeedSpec};
use skewspec::normalization::{compute_context, shifted_skew_matrix};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sampled_matrices_are_skew(n in 1usize..50, p in 0.0f64..=1.0, q in 0.0f64..=1.0, seed in any::<u64>(), replica in any::<u64>()) {
        let params = GraphParams::new(n, p, q).unwrap();
        let g = sample_graph(&params, SeedSpec::new(seed, replica));
        let s = skew_adjacency(&g);
        prop_assert!(s.is_skew_symmetric());
        prop_assert!((0..n).all(|i| s.get(i, i) == 0));
        prop_assert_eq!(s.entries().iter().filter(|&&x| x == 1).count(), g.arc_count());
        if let Ok(ctx) = compute_context(p, q) {
            prop_assert!(shifted_skew_matrix(&s, &ctx).is_exactly_skew());
        }
        prop_assert_eq!(OrientedGraph::read_arcs(&g.write_arcs()).unwrap(), g);
    }

    #[test]
    fn identical_seeds_reproduce(n in 2usize..40, p in 0.0f64..=1.0, q in 0.0f64..=1.0, seed in any::<u64>()) {
        let params = GraphParams::new(n, p, q).unwrap();
        prop_assert_eq!(sample_graph(&params, SeedSpec::new(seed, 5)), sample_graph(&params, SeedSpec::new(seed, 5)));
    }
}
