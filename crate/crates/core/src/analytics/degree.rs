use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AnalyticsError, CentralityKind, CentralityScores, MetricParams};
use crate::graph::WeightedGraph;

/// Mean degree below this fraction of the maximum possible degree reads as a
/// loosely connected structure.
pub const LEFT_THRESHOLD: f64 = 0.25;
/// Mean degree above this fraction reads as over-dependent.
pub const RIGHT_THRESHOLD: f64 = 0.75;

/// Number of incident edges per node; in-degree plus out-degree when the
/// graph is directed. With `weighted` the incident weights are summed instead.
pub fn degree_centrality(g: &WeightedGraph, weighted: bool) -> CentralityScores {
    let n = g.len();
    let a = g.adjacency();
    let scores = (0..n)
        .map(|i| {
            let contrib = |w: f64| if weighted { w } else if w > 0.0 { 1.0 } else { 0.0 };
            let out: f64 = (0..n).map(|j| contrib(a[(i, j)])).sum();
            if g.is_directed() {
                out + (0..n).map(|j| contrib(a[(j, i)])).sum::<f64>()
            } else {
                out
            }
        })
        .collect();
    let params = MetricParams {
        weighted: Some(weighted),
        ..MetricParams::default()
    };
    CentralityScores::for_nodes(CentralityKind::Degree, params, g, scores)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Skew {
    LeftConcentrated,
    Balanced,
    RightConcentrated,
}

impl Skew {
    pub fn label(self) -> &'static str {
        match self {
            Self::LeftConcentrated => "left-concentrated",
            Self::Balanced => "balanced",
            Self::RightConcentrated => "right-concentrated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeHistogram {
    /// degree -> number of nodes with that degree
    pub buckets: BTreeMap<usize, usize>,
    pub mean_degree: f64,
    pub max_possible_degree: usize,
    pub skew: Skew,
}

pub fn degree_histogram(scores: &CentralityScores) -> Result<DegreeHistogram, AnalyticsError> {
    if scores.kind != CentralityKind::Degree {
        return Err(AnalyticsError::WrongKind {
            expected: CentralityKind::Degree,
            found: scores.kind,
        });
    }
    if scores.params.weighted == Some(true) {
        return Err(AnalyticsError::WeightedHistogram);
    }
    let n = scores.scores.len();
    let mut buckets = BTreeMap::new();
    for &d in &scores.scores {
        *buckets.entry(d as usize).or_insert(0) += 1;
    }
    let mean_degree = if n == 0 { 0.0 } else { scores.scores.iter().sum::<f64>() / n as f64 };
    let per_peer = if scores.directed { 2 } else { 1 };
    let max_possible_degree = per_peer * n.saturating_sub(1);
    let ratio = if max_possible_degree == 0 {
        0.0
    } else {
        mean_degree / max_possible_degree as f64
    };
    let skew = if ratio < LEFT_THRESHOLD {
        Skew::LeftConcentrated
    } else if ratio > RIGHT_THRESHOLD {
        Skew::RightConcentrated
    } else {
        Skew::Balanced
    };
    Ok(DegreeHistogram {
        buckets,
        mean_degree,
        max_possible_degree,
        skew,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> WeightedGraph {
        let mut e = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                e.push((i, j, 1.0));
            }
        }
        WeightedGraph::from_edges(n, &e, false).unwrap()
    }

    #[test]
    fn triangle_and_path() {
        assert_eq!(degree_centrality(&complete(3), false).scores, vec![2.0; 3]);
        let path = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)], false).unwrap();
        assert_eq!(degree_centrality(&path, false).scores, vec![1.0, 2.0, 1.0]);
    }

    #[test]
    fn isolated_node_has_zero_degree() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0)], false).unwrap();
        assert_eq!(degree_centrality(&g, false).scores[2], 0.0);
    }

    #[test]
    fn directed_counts_in_and_out() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 2.0), (1, 2, 3.0)], true).unwrap();
        assert_eq!(degree_centrality(&g, false).scores, vec![1.0, 2.0, 1.0]);
        assert_eq!(degree_centrality(&g, true).scores, vec![2.0, 5.0, 3.0]);
    }

    #[test]
    fn histograms() {
        let h = degree_histogram(&degree_centrality(&complete(3), false)).unwrap();
        assert_eq!(h.buckets, BTreeMap::from([(2, 3)]));

        let empty = WeightedGraph::from_edges(4, &[], false).unwrap();
        let h = degree_histogram(&degree_centrality(&empty, false)).unwrap();
        assert_eq!(h.buckets, BTreeMap::from([(0, 4)]));
        assert_eq!(h.skew, Skew::LeftConcentrated);

        let h = degree_histogram(&degree_centrality(&complete(5), false)).unwrap();
        assert_eq!(h.buckets, BTreeMap::from([(4, 5)]));
        assert_eq!(h.skew, Skew::RightConcentrated);
    }

    #[test]
    fn histogram_rejects_other_kinds() {
        let g = complete(3);
        let mut s = degree_centrality(&g, false);
        s.kind = CentralityKind::PageRank;
        assert!(matches!(degree_histogram(&s), Err(AnalyticsError::WrongKind { .. })));
        assert_eq!(
            degree_histogram(&degree_centrality(&g, true)),
            Err(AnalyticsError::WeightedHistogram)
        );
    }

    #[test]
    fn balanced_middle() {
        // cycle of 5: mean 2, max 4 -> ratio 0.5
        let e: Vec<_> = (0..5).map(|i| (i, (i + 1) % 5, 1.0)).collect();
        let g = WeightedGraph::from_edges(5, &e, false).unwrap();
        assert_eq!(degree_histogram(&degree_centrality(&g, false)).unwrap().skew, Skew::Balanced);
    }
}
