use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{CentralityKind, CentralityScores, DistanceMode, MetricParams};
use crate::graph::WeightedGraph;

/// Lengths closer than this (relative) are the same shortest-path length.
const TIE_EPS: f64 = 1e-12;

pub(crate) fn same_length(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_EPS * a.abs().max(b.abs()).max(1.0)
}

/// All-pairs shortest path lengths. `None` marks an unreachable pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    n: usize,
    mode: DistanceMode,
    rows: Vec<Vec<Option<f64>>>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn mode(&self) -> DistanceMode {
        self.mode
    }

    pub fn get(&self, from: usize, to: usize) -> Option<f64> {
        self.rows[from][to]
    }

    pub fn row(&self, from: usize) -> &[Option<f64>] {
        &self.rows[from]
    }
}

/// Shortest-path DAG from one source, as needed by Brandes' accumulation.
pub(crate) struct SingleSource {
    /// Settled nodes in nondecreasing distance order.
    pub order: Vec<usize>,
    pub dist: Vec<Option<f64>>,
    /// Number of shortest paths from the source.
    pub sigma: Vec<f64>,
    pub preds: Vec<Vec<usize>>,
}

pub(crate) fn edge_length(mode: DistanceMode, w: f64) -> f64 {
    match mode {
        DistanceMode::Hop => 1.0,
        DistanceMode::InverseWeight => 1.0 / w,
    }
}

#[derive(PartialEq)]
struct Frontier(f64, usize);

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then index
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) fn single_source(g: &WeightedGraph, source: usize, mode: DistanceMode) -> SingleSource {
    let n = g.len();
    let mut ss = SingleSource {
        order: Vec::with_capacity(n),
        dist: vec![None; n],
        sigma: vec![0.0; n],
        preds: vec![Vec::new(); n],
    };
    ss.dist[source] = Some(0.0);
    ss.sigma[source] = 1.0;

    match mode {
        DistanceMode::Hop => {
            let mut queue = VecDeque::from([source]);
            while let Some(v) = queue.pop_front() {
                ss.order.push(v);
                let dv = ss.dist[v].unwrap_or_default();
                for (u, _) in g.successors(v) {
                    match ss.dist[u] {
                        None => {
                            ss.dist[u] = Some(dv + 1.0);
                            queue.push_back(u);
                            ss.sigma[u] += ss.sigma[v];
                            ss.preds[u].push(v);
                        }
                        Some(du) if du == dv + 1.0 => {
                            ss.sigma[u] += ss.sigma[v];
                            ss.preds[u].push(v);
                        }
                        Some(_) => {}
                    }
                }
            }
        }
        DistanceMode::InverseWeight => {
            let mut settled = vec![false; n];
            let mut heap = BinaryHeap::from([Frontier(0.0, source)]);
            while let Some(Frontier(d, v)) = heap.pop() {
                if settled[v] || ss.dist[v].is_some_and(|dv| d > dv) {
                    continue;
                }
                settled[v] = true;
                ss.order.push(v);
                for (u, w) in g.successors(v) {
                    if settled[u] {
                        continue;
                    }
                    let alt = d + edge_length(mode, w);
                    match ss.dist[u] {
                        Some(du) if same_length(alt, du) => {
                            ss.sigma[u] += ss.sigma[v];
                            ss.preds[u].push(v);
                        }
                        Some(du) if alt > du => {}
                        _ => {
                            ss.dist[u] = Some(alt);
                            ss.sigma[u] = ss.sigma[v];
                            ss.preds[u].clear();
                            ss.preds[u].push(v);
                            heap.push(Frontier(alt, u));
                        }
                    }
                }
            }
        }
    }
    ss
}

pub fn shortest_paths(g: &WeightedGraph, mode: DistanceMode) -> DistanceMatrix {
    let rows = (0..g.len()).map(|s| single_source(g, s, mode).dist).collect();
    DistanceMatrix { n: g.len(), mode, rows }
}

/// `C(v) = (r - 1) / ((n - 1) * Σ d(v, u))` over the `r - 1` nodes reachable
/// from `v`. On a connected graph the factor is 1 and this is the plain
/// inverse distance sum. Nodes that reach nobody score 0.
pub fn closeness_centrality(g: &WeightedGraph, mode: DistanceMode) -> CentralityScores {
    let n = g.len();
    let dm = shortest_paths(g, mode);
    let scores = (0..n)
        .map(|v| {
            let reached: Vec<f64> = dm.row(v).iter().enumerate().filter(|&(u, _)| u != v).filter_map(|(_, d)| *d).collect();
            let total: f64 = reached.iter().sum();
            if reached.is_empty() || total <= 0.0 {
                0.0
            } else {
                reached.len() as f64 / ((n - 1) as f64 * total)
            }
        })
        .collect();
    let params = MetricParams {
        distance: Some(mode),
        ..MetricParams::default()
    };
    CentralityScores::for_nodes(CentralityKind::Closeness, params, g, scores)
}
