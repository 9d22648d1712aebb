//! Deterministic workloads shared by the benchmarks.

use archgraph_core::feed::FeedItem;
use archgraph_core::{Accountability, CbmModel, Competency, Component, Edge, RelationType, WeightedGraph};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS: &[&str] = &[
    "logistics", "freight", "billing", "payroll", "customer", "pricing", "supply", "inventory", "marketing",
    "compliance", "risk", "treasury", "sourcing", "analytics", "service", "quality", "growth", "loss",
];

/// Connected undirected graph: a random spanning tree plus about
/// `avg_degree` edges per node, weights in (0, 5].
pub fn connected_graph(n: usize, avg_degree: f64, seed: u64) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v, 5.0 - rng.random_range(0.0..5.0)));
    }
    let p = ((avg_degree - 2.0).max(0.0) / n as f64).min(1.0);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) && !edges.iter().any(|&(a, b, _)| (a, b) == (i, j)) {
                edges.push((i, j, 5.0 - rng.random_range(0.0..5.0)));
            }
        }
    }
    WeightedGraph::from_edges(n, &edges, false).expect("generated graph is valid")
}

fn words(rng: &mut ChaCha8Rng, n: usize) -> String {
    (0..n).map(|_| *WORDS.choose(rng).expect("nonempty")).collect::<Vec<_>>().join(" ")
}

/// Valid model with `n` components spread over eight competencies, two
/// relation types and roughly three edges per component.
pub fn model(n: usize, seed: u64) -> CbmModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = CbmModel::new(format!("bench-{n}"));
    for k in 0..8 {
        m.competencies.push(Competency {
            id: format!("comp{k}"),
            name: format!("Competency {k}"),
            order: k,
        });
    }
    m.relation_types.push(RelationType::new("peer", false, 1.0));
    m.relation_types.push(RelationType::new("feeds", true, 0.5));
    for i in 0..n {
        let mut c = Component::new(
            format!("c{i:04}"),
            format!("Component {i}"),
            format!("comp{}", i % 8),
            Accountability::ALL[i % 3],
        );
        c.description = words(&mut rng, 12);
        m.components.push(c);
    }
    for v in 1..n {
        let u = rng.random_range(0..v);
        m.edges.push(Edge::new(format!("c{u:04}"), format!("c{v:04}"), "peer", None));
    }
    for _ in 0..2 * n {
        let (s, t) = (rng.random_range(0..n), rng.random_range(0..n));
        let key = (format!("c{s:04}"), format!("c{t:04}"));
        if s != t && !m.edges.iter().any(|e| e.source.as_str() == key.0 && e.target.as_str() == key.1) {
            m.edges.push(Edge::new(key.0, key.1, "feeds", Some(rng.random_range(0.1..5.0))));
        }
    }
    m
}

/// News items drawn from the same vocabulary as [`model`] descriptions.
pub fn items(n: usize, seed: u64) -> Vec<FeedItem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| FeedItem {
            id: format!("item-{i:05}"),
            title: words(&mut rng, 6),
            body: words(&mut rng, 30),
            published: None,
            source: "bench".into(),
            link: None,
        })
        .collect()
}
