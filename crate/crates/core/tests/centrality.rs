#[path = "common/oracles.rs"]
mod oracles;

use archgraph_core::analytics::{
    betweenness_centrality, closeness_centrality, degree_centrality, degree_histogram, edge_betweenness,
    eigenvector_centrality, pagerank, DistanceMode,
};
use archgraph_core::WeightedGraph;
use oracles::{degree_count, mixed_weight, random_connected, Length, PathTable};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn modes() -> [(DistanceMode, Length); 2] {
    [(DistanceMode::Hop, Length::Hop), (DistanceMode::InverseWeight, Length::InverseWeight)]
}

fn assert_close(a: &[f64], b: &[f64], tol: f64, what: &str) {
    assert_eq!(a.len(), b.len(), "{what}: length");
    for (k, (x, y)) in a.iter().zip(b).enumerate() {
        assert!((x - y).abs() <= tol, "{what}[{k}]: {x} vs {y}");
    }
}

#[test]
fn matches_path_enumeration_on_random_connected_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0bad_cafe);
    for _ in 0..200 {
        let n = rng.random_range(2..=8);
        let g = random_connected(&mut rng, n, 0.35, mixed_weight);
        assert_eq!(degree_centrality(&g, false).scores, degree_count(&g));
        for (mode, length) in modes() {
            let table = PathTable::enumerate(&g, length);
            assert_close(&betweenness_centrality(&g, mode, false).scores, &table.betweenness(false), 1e-9, "betweenness");
            assert_close(&closeness_centrality(&g, mode).scores, &table.closeness(), 1e-9, "closeness");
            let eb = edge_betweenness(&g, mode, false);
            let oracle = table.edge_betweenness(false);
            assert_eq!(eb.edges.len(), g.edge_count());
            for (k, &(i, j)) in eb.edges.iter().enumerate() {
                let want = oracle.get(&(i, j)).copied().unwrap_or(0.0);
                assert!((eb.scores[k] - want).abs() <= 1e-9, "edge {i}-{j}: {} vs {want}", eb.scores[k]);
            }
        }
    }
}

#[test]
fn directed_betweenness_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..60 {
        let n = rng.random_range(2..=7);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && rng.random_bool(0.3) {
                    edges.push((i, j, mixed_weight(&mut rng)));
                }
            }
        }
        let g = WeightedGraph::from_edges(n, &edges, true).unwrap();
        for (mode, length) in modes() {
            let table = PathTable::enumerate(&g, length);
            assert_close(&betweenness_centrality(&g, mode, false).scores, &table.betweenness(true), 1e-9, "directed");
            let eb = edge_betweenness(&g, mode, false);
            let oracle = table.edge_betweenness(true);
            for (k, e) in eb.edges.iter().enumerate() {
                let want = oracle.get(e).copied().unwrap_or(0.0);
                assert!((eb.scores[k] - want).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn normalization_divides_by_pair_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = random_connected(&mut rng, 7, 0.3, mixed_weight);
    let raw = betweenness_centrality(&g, DistanceMode::Hop, false).scores;
    let norm = betweenness_centrality(&g, DistanceMode::Hop, true).scores;
    for (r, s) in raw.iter().zip(&norm) {
        assert!((r / 15.0 - s).abs() < 1e-12);
    }
    let raw = edge_betweenness(&g, DistanceMode::Hop, false).scores;
    let norm = edge_betweenness(&g, DistanceMode::Hop, true).scores;
    for (r, s) in raw.iter().zip(&norm) {
        assert!((r / 21.0 - s).abs() < 1e-12);
    }
}

fn arb_graph(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (1..=max_n, any::<u64>(), 0.0..0.8f64).prop_map(|(n, seed, p)| {
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

fn arb_connected(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (2..=max_n, any::<u64>(), 0.0..0.6f64).prop_map(|(n, seed, p)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_connected(&mut rng, n, p, mixed_weight)
    })
}

proptest! {
    #[test]
    fn degree_sum_is_twice_edge_count(g in arb_graph(12)) {
        let total: f64 = degree_centrality(&g, false).scores.iter().sum();
        prop_assert_eq!(total, 2.0 * g.edge_count() as f64);
    }

    #[test]
    fn histogram_counts_every_node(g in arb_graph(12)) {
        let h = degree_histogram(&degree_centrality(&g, false)).unwrap();
        prop_assert_eq!(h.buckets.values().sum::<usize>(), g.len());
    }

    #[test]
    fn adding_an_edge_never_lowers_hop_closeness(g in arb_connected(10), pick in any::<u64>()) {
        let n = g.len();
        let missing: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| g.weight(i, j) == 0.0)
            .collect();
        prop_assume!(!missing.is_empty());
        let (i, j) = missing[(pick % missing.len() as u64) as usize];
        let mut edges = g.edges();
        edges.push((i, j, 1.0));
        let bigger = WeightedGraph::from_edges(n, &edges, false).unwrap();
        let before = closeness_centrality(&g, DistanceMode::Hop).scores;
        let after = closeness_centrality(&bigger, DistanceMode::Hop).scores;
        for v in 0..n {
            prop_assert!(after[v] >= before[v] - 1e-15);
        }
    }

    #[test]
    fn pagerank_is_a_positive_distribution(g in arb_graph(15), damping in 0.5..0.95f64) {
        let pr = pagerank(&g, damping, 1e-12, 10_000).unwrap();
        let total: f64 = pr.scores.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(pr.scores.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn eigenvector_is_an_eigenvector(g in arb_connected(12)) {
        let tol = 1e-10;
        let x = eigenvector_centrality(&g, tol, 100_000).unwrap().scores;
        let a = g.adjacency();
        let n = g.len();
        let ax: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a[(i, j)] * x[j]).sum()).collect();
        let norm2: f64 = x.iter().map(|v| v * v).sum();
        let lambda = x.iter().zip(&ax).map(|(a, b)| a * b).sum::<f64>() / norm2;
        let residual = ax.iter().zip(&x).map(|(a, b)| (a - lambda * b).abs()).fold(0.0, f64::max);
        prop_assert!(residual < 10.0 * tol * lambda.max(1.0), "residual {residual}");
    }

    #[test]
    fn filtered_degree_is_bounded_by_full_degree(g in arb_graph(10), keep in any::<u64>()) {
        let kept: Vec<_> = g.edges().into_iter().enumerate().filter(|(k, _)| keep >> (k % 64) & 1 == 1).map(|(_, e)| e).collect();
        let sub = WeightedGraph::from_edges(g.len(), &kept, false).unwrap();
        let full = degree_centrality(&g, false).scores;
        let part = degree_centrality(&sub, false).scores;
        for (p, f) in part.iter().zip(&full) {
            prop_assert!(p <= f);
        }
    }

    #[test]
    fn betweenness_is_nonnegative_and_leaves_score_zero(g in arb_graph(10)) {
        let b = betweenness_centrality(&g, DistanceMode::InverseWeight, false).scores;
        let d = degree_centrality(&g, false).scores;
        for v in 0..g.len() {
            prop_assert!(b[v] >= 0.0);
            if d[v] <= 1.0 {
                prop_assert!(b[v].abs() < 1e-12);
            }
        }
    }
}
