use archgraph_core::community::{girvan_newman, label_propagation, modularity, StopRule};
use archgraph_core::WeightedGraph;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn barbell() -> WeightedGraph {
    WeightedGraph::from_edges(
        6,
        &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0), (2, 3, 1.0)],
        false,
    )
    .unwrap()
}

#[test]
fn girvan_newman_cuts_the_bridge() {
    for _ in 0..5 {
        let p = girvan_newman(&barbell(), StopRule::TargetCommunities(2)).unwrap();
        assert_eq!(p.communities(), vec![vec![0, 1, 2], vec![3, 4, 5]]);
    }
    let best = girvan_newman(&barbell(), StopRule::MaxModularity).unwrap();
    assert_eq!(best.count, 2);
    assert!((best.modularity - 5.0 / 14.0).abs() < 1e-12);
}

#[test]
fn two_triangles_have_modularity_one_half() {
    let g = WeightedGraph::from_edges(
        6,
        &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0)],
        false,
    )
    .unwrap();
    assert_eq!(modularity(&g, &[0, 0, 0, 1, 1, 1]).unwrap(), 0.5);
}

fn arb_graph(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (1..=max_n, any::<u64>(), 0.0..0.7f64).prop_map(|(n, seed, p)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(p) {
                    edges.push((i, j, 5.0 - rng.random_range(0.0..5.0)));
                }
            }
        }
        WeightedGraph::from_edges(n, &edges, false).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn modularity_is_bounded(g in arb_graph(12), labels in prop::collection::vec(0usize..4, 12)) {
        prop_assume!(g.edge_count() > 0);
        let q = modularity(&g, &labels[..g.len()]).unwrap();
        prop_assert!((-0.5 - 1e-12..=1.0 + 1e-12).contains(&q), "{q}");
    }

    #[test]
    fn max_modularity_beats_single_community(g in arb_graph(10)) {
        prop_assume!(g.edge_count() > 0);
        let p = girvan_newman(&g, StopRule::MaxModularity).unwrap();
        let single = modularity(&g, &vec![0; g.len()]).unwrap();
        prop_assert!(p.modularity >= single - 1e-12);
        prop_assert!(p.modularity >= -1e-12);
    }

    #[test]
    fn disconnected_components_stay_apart(g in arb_graph(10), seed in any::<u64>()) {
        prop_assume!(g.edge_count() > 0);
        let comps = g.components();
        let lpa = label_propagation(&g, seed, 100);
        for c in &comps {
            for other in comps.iter().filter(|o| o[0] != c[0]) {
                prop_assert_ne!(lpa.membership[c[0]], lpa.membership[other[0]]);
            }
        }
        let gn = girvan_newman(&g, StopRule::MaxModularity).unwrap();
        for c in &comps {
            for other in comps.iter().filter(|o| o[0] != c[0]) {
                prop_assert_ne!(gn.membership[c[0]], gn.membership[other[0]]);
            }
        }
    }

    #[test]
    fn label_propagation_is_reproducible(g in arb_graph(12), seed in any::<u64>()) {
        prop_assert_eq!(label_propagation(&g, seed, 100), label_propagation(&g, seed, 100));
    }
}
