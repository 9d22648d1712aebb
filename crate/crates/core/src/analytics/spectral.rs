use nalgebra::DVector;

use super::{check_tol, AnalyticsError, CentralityKind, CentralityScores, MetricParams};
use crate::graph::WeightedGraph;

struct Dominant {
    value: f64,
    vector: DVector<f64>,
}

/// Perron vector of one connected, undirected piece by power iteration on
/// `A + I`. The shift keeps bipartite pieces from oscillating without
/// changing the eigenvectors.
fn dominant_pair(g: &WeightedGraph, tol: f64, max_iter: usize) -> Result<Dominant, (usize, DVector<f64>)> {
    let n = g.len();
    let a = g.adjacency();
    if n == 1 {
        return Ok(Dominant {
            value: 0.0,
            vector: DVector::from_element(1, 1.0),
        });
    }
    let mut x = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    for _ in 0..max_iter {
        let mut next = a * &x + &x;
        let norm = next.norm();
        next /= norm;
        let step = (&next - &x).amax();
        x = next;
        let ax = a * &x;
        let lambda = x.dot(&ax);
        let residual = (&ax - &x * lambda).amax();
        if step < tol && residual < tol {
            return Ok(Dominant { value: lambda, vector: x });
        }
    }
    Err((max_iter, x))
}

/// Dominant eigenvector of the adjacency, L2-normalized and nonnegative.
///
/// Each connected component is solved on its own. When several components
/// share the largest eigenvalue the dominant eigenspace is not
/// one-dimensional and the call fails instead of picking one.
pub fn eigenvector_centrality(g: &WeightedGraph, tol: f64, max_iter: usize) -> Result<CentralityScores, AnalyticsError> {
    check_tol(tol)?;
    if g.is_directed() {
        return Err(AnalyticsError::Directed);
    }
    if g.edge_count() == 0 {
        return Err(AnalyticsError::EmptyGraph);
    }
    let n = g.len();
    let mut best: Vec<(f64, Vec<usize>, DVector<f64>)> = Vec::new();
    for comp in g.components() {
        if comp.len() < 2 {
            continue;
        }
        let sub = g.subgraph(&comp);
        let d = dominant_pair(&sub, tol, max_iter).map_err(|(iterations, part)| {
            let mut last = vec![0.0; n];
            for (k, &i) in comp.iter().enumerate() {
                last[i] = part[k];
            }
            AnalyticsError::NotConverged { iterations, last }
        })?;
        best.push((d.value, comp, d.vector));
    }
    let top = best.iter().map(|b| b.0).fold(f64::NEG_INFINITY, f64::max);
    let tie = 10.0 * tol * top.max(1.0);
    let leaders: Vec<_> = best.iter().filter(|b| top - b.0 <= tie).collect();
    if leaders.len() > 1 {
        return Err(AnalyticsError::DegenerateEigenspace {
            eigenvalue: top,
            components: leaders.len(),
        });
    }
    let (_, comp, vector) = leaders[0];
    let mut scores = vec![0.0; n];
    for (k, &i) in comp.iter().enumerate() {
        scores[i] = vector[k].abs();
    }
    let params = MetricParams {
        tol: Some(tol),
        max_iter: Some(max_iter),
        ..MetricParams::default()
    };
    Ok(CentralityScores::for_nodes(CentralityKind::Eigenvector, params, g, scores))
}

/// Stationary distribution of the damped random walk on the row-normalized
/// weighted adjacency. Rows without out-weight spread their mass uniformly.
pub fn pagerank(g: &WeightedGraph, damping: f64, tol: f64, max_iter: usize) -> Result<CentralityScores, AnalyticsError> {
    if !(damping > 0.0 && damping < 1.0) {
        return Err(AnalyticsError::InvalidDamping(damping));
    }
    check_tol(tol)?;
    let n = g.len();
    let params = MetricParams {
        damping: Some(damping),
        tol: Some(tol),
        max_iter: Some(max_iter),
        ..MetricParams::default()
    };
    if n == 0 {
        return Ok(CentralityScores::for_nodes(CentralityKind::PageRank, params, g, Vec::new()));
    }
    let a = g.adjacency();
    let out_weight: Vec<f64> = (0..n).map(|i| a.row(i).sum()).collect();
    let uniform = 1.0 / n as f64;
    let mut x = vec![uniform; n];
    for _ in 0..max_iter {
        let dangling: f64 = (0..n).filter(|&i| out_weight[i] == 0.0).map(|i| x[i]).sum();
        let mut next = vec![(1.0 - damping) * uniform + damping * dangling * uniform; n];
        for i in 0..n {
            if out_weight[i] == 0.0 {
                continue;
            }
            let share = damping * x[i] / out_weight[i];
            for (j, w) in g.successors(i) {
                next[j] += share * w;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        let step = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = next;
        if step < tol {
            return Ok(CentralityScores::for_nodes(CentralityKind::PageRank, params, g, x));
        }
    }
    Err(AnalyticsError::NotConverged { iterations: max_iter, last: x })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k2_eigenvector() {
        let g = WeightedGraph::from_edges(2, &[(0, 1, 1.0)], false).unwrap();
        let s = eigenvector_centrality(&g, 1e-10, 1000).unwrap();
        for v in s.scores {
            assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
        }
    }

    #[test]
    fn star_center_to_leaf_ratio() {
        let g = WeightedGraph::from_edges(4, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)], false).unwrap();
        let s = eigenvector_centrality(&g, 1e-12, 10_000).unwrap();
        assert!((s.scores[0] / s.scores[1] - 3f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn two_k2_is_degenerate() {
        let g = WeightedGraph::from_edges(4, &[(0, 1, 1.0), (2, 3, 1.0)], false).unwrap();
        assert!(matches!(
            eigenvector_centrality(&g, 1e-10, 1000),
            Err(AnalyticsError::DegenerateEigenspace { components: 2, .. })
        ));
    }

    #[test]
    fn unequal_components_pick_the_larger() {
        // triangle (lambda 2) plus K2 (lambda 1)
        let g = WeightedGraph::from_edges(5, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0)], false).unwrap();
        let s = eigenvector_centrality(&g, 1e-10, 1000).unwrap();
        assert_eq!(&s.scores[3..], &[0.0, 0.0]);
        assert!((s.scores[0] - 1.0 / 3f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn eigenvector_rejects_edgeless_and_directed() {
        let g = WeightedGraph::from_edges(3, &[], false).unwrap();
        assert_eq!(eigenvector_centrality(&g, 1e-9, 100), Err(AnalyticsError::EmptyGraph));
        let d = WeightedGraph::from_edges(2, &[(0, 1, 1.0)], true).unwrap();
        assert_eq!(eigenvector_centrality(&d, 1e-9, 100), Err(AnalyticsError::Directed));
    }

    #[test]
    fn non_convergence_carries_last_iterate() {
        let g = WeightedGraph::from_edges(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)], false).unwrap();
        match eigenvector_centrality(&g, 1e-14, 2) {
            Err(AnalyticsError::NotConverged { iterations: 2, last }) => assert_eq!(last.len(), 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pagerank_examples() {
        let k2 = WeightedGraph::from_edges(2, &[(0, 1, 1.0)], false).unwrap();
        let p = pagerank(&k2, 0.85, 1e-12, 1000).unwrap();
        assert!((p.scores[0] - 0.5).abs() < 1e-12 && (p.scores[1] - 0.5).abs() < 1e-12);

        let one = WeightedGraph::from_edges(1, &[], false).unwrap();
        assert_eq!(pagerank(&one, 0.85, 1e-12, 1000).unwrap().scores, vec![1.0]);

        assert_eq!(pagerank(&k2, 1.0, 1e-9, 10), Err(AnalyticsError::InvalidDamping(1.0)));
    }

    #[test]
    fn pagerank_directed_chain_increases() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)], true).unwrap();
        let p = pagerank(&g, 0.85, 1e-12, 1000).unwrap().scores;
        assert!(p[0] < p[1] && p[1] < p[2], "{p:?}");
    }
}
