use super::paths::single_source;
use super::{CentralityKind, CentralityScores, DistanceMode, MetricParams};
use crate::graph::WeightedGraph;

/// Brandes accumulation over every source. Returns raw node and edge
/// dependency sums, edges keyed as in [`WeightedGraph::edges`].
fn accumulate(g: &WeightedGraph, mode: DistanceMode) -> (Vec<f64>, Vec<(usize, usize)>, Vec<f64>) {
    let n = g.len();
    let edge_list: Vec<(usize, usize)> = g.edges().into_iter().map(|(i, j, _)| (i, j)).collect();
    let mut edge_slot = vec![usize::MAX; n * n];
    for (k, &(i, j)) in edge_list.iter().enumerate() {
        edge_slot[i * n + j] = k;
        if !g.is_directed() {
            edge_slot[j * n + i] = k;
        }
    }

    let mut node = vec![0.0; n];
    let mut edge = vec![0.0; edge_list.len()];
    let mut delta = vec![0.0; n];
    for s in 0..n {
        let ss = single_source(g, s, mode);
        delta.iter_mut().for_each(|d| *d = 0.0);
        for &w in ss.order.iter().rev() {
            for &v in &ss.preds[w] {
                let c = ss.sigma[v] / ss.sigma[w] * (1.0 + delta[w]);
                delta[v] += c;
                edge[edge_slot[v * n + w]] += c;
            }
            if w != s {
                node[w] += delta[w];
            }
        }
    }
    if !g.is_directed() {
        // each unordered pair was counted from both ends
        node.iter_mut().for_each(|x| *x /= 2.0);
        edge.iter_mut().for_each(|x| *x /= 2.0);
    }
    (node, edge_list, edge)
}

fn pairs(n: usize, directed: bool) -> f64 {
    let p = n as f64 * n.saturating_sub(1) as f64;
    if directed {
        p
    } else {
        p / 2.0
    }
}

/// `Σ σ_st(v) / σ_st` over pairs `s ≠ v ≠ t`, unordered pairs once when the
/// graph is undirected. With `normalized` the sums are divided by the number
/// of pairs not involving `v`.
pub fn betweenness_centrality(g: &WeightedGraph, mode: DistanceMode, normalized: bool) -> CentralityScores {
    let (mut scores, _, _) = accumulate(g, mode);
    if normalized && g.len() > 2 {
        let scale = pairs(g.len() - 1, g.is_directed());
        scores.iter_mut().for_each(|x| *x /= scale);
    }
    let params = MetricParams {
        distance: Some(mode),
        normalized: Some(normalized),
        ..MetricParams::default()
    };
    CentralityScores::for_nodes(CentralityKind::Betweenness, params, g, scores)
}

/// Edge analogue of [`betweenness_centrality`]: `Σ σ_st(e) / σ_st` over all
/// pairs, each edge listed once.
pub fn edge_betweenness(g: &WeightedGraph, mode: DistanceMode, normalized: bool) -> CentralityScores {
    let (_, edges, mut scores) = accumulate(g, mode);
    if normalized && g.len() > 1 {
        let scale = pairs(g.len(), g.is_directed());
        scores.iter_mut().for_each(|x| *x /= scale);
    }
    let params = MetricParams {
        distance: Some(mode),
        normalized: Some(normalized),
        ..MetricParams::default()
    };
    CentralityScores {
        kind: CentralityKind::EdgeBetweenness,
        params,
        directed: g.is_directed(),
        node_ids: g.node_ids().to_vec(),
        edges,
        scores,
    }
}
