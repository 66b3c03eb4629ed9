//! Property tests for the spec's cross-cutting invariants.

use distcycle::clique::girth::girth_plus_one;
use distcycle::gen;
use distcycle::oracle::{brute_girth, neighborhood, prune_degenerate, Girth};
use distcycle::turan::girth_turan_k;
use distcycle::witness::validate_witness;
use distcycle::Graph;
use proptest::prelude::*;

fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (4..max_n, 0.0f64..0.4, any::<u64>()).prop_map(|(n, p, seed)| gen::gen_random(n, p, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn edge_list_roundtrip(g in arb_graph(48)) {
        let text = g.to_edge_list();
        let back = Graph::parse_edge_list(&text).unwrap();
        prop_assert_eq!(g, back);
    }

    #[test]
    fn prune_preserves_girth(g in arb_graph(64)) {
        prop_assert_eq!(brute_girth(&prune_degenerate(&g)), brute_girth(&g));
    }

    #[test]
    fn neighborhood_is_tree_below_half_girth(g in arb_graph(40)) {
        if let Girth::Finite(girth) = brute_girth(&g) {
            for radius in 1..=3usize {
                if 2 * radius < girth {
                    for v in g.vertices() {
                        prop_assert!(neighborhood(&g, v, radius).is_tree());
                    }
                }
            }
        }
    }

    #[test]
    fn turan_k_monotone_in_m(n in 4usize..200, m in 0usize..4000, dm in 1usize..500) {
        let max_m = n * (n - 1) / 2;
        let m = m.min(max_m);
        let m2 = (m + dm).min(max_m);
        prop_assert!(girth_turan_k(n, m2) <= girth_turan_k(n, m));
    }

    #[test]
    fn planted_witness_always_validates(n in 6usize..40, len in 3usize..10, seed in any::<u64>()) {
        let len = len.min(n);
        let (g, w) = gen::plant_cycle(&Graph::empty(n), len, seed).unwrap();
        prop_assert!(validate_witness(&g, &w, len));
        prop_assert!(brute_girth(&g) <= Girth::Finite(len));
    }

    #[test]
    fn girth_estimate_consistent(g in arb_graph(48)) {
        let run = girth_plus_one(&g).unwrap();
        prop_assert!(run.estimate.consistent_with(brute_girth(&g)));
    }
}
