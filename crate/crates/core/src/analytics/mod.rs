//! Topological analytics over a [`WeightedGraph`]: degree, closeness,
//! betweenness (node and edge), eigenvector and PageRank centralities, the
//! degree histogram and all-pairs shortest paths.
//!
//! Every function is a pure function of its graph.

mod betweenness;
mod degree;
mod paths;
mod spectral;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::WeightedGraph;
use crate::model::NodeId;

pub use betweenness::{betweenness_centrality, edge_betweenness};
pub use degree::{degree_centrality, degree_histogram, DegreeHistogram, Skew};
pub use paths::{closeness_centrality, shortest_paths, DistanceMatrix};
pub use spectral::{eigenvector_centrality, pagerank};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CentralityKind {
    Degree,
    Closeness,
    Betweenness,
    EdgeBetweenness,
    Eigenvector,
    #[serde(rename = "pagerank")]
    PageRank,
}

impl CentralityKind {
    pub const ALL: [CentralityKind; 6] = [
        Self::Degree,
        Self::Closeness,
        Self::Betweenness,
        Self::EdgeBetweenness,
        Self::Eigenvector,
        Self::PageRank,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Degree => "degree",
            Self::Closeness => "closeness",
            Self::Betweenness => "betweenness",
            Self::EdgeBetweenness => "edge-betweenness",
            Self::Eigenvector => "eigenvector",
            Self::PageRank => "pagerank",
        }
    }
}

impl fmt::Display for CentralityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CentralityKind {
    type Err = AnalyticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| AnalyticsError::UnknownMetric(s.to_owned()))
    }
}

/// How edge weights turn into path lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMode {
    /// Every edge has length 1.
    #[default]
    Hop,
    /// An edge of weight `w` has length `1 / w`: strong relations are short.
    InverseWeight,
}

impl FromStr for DistanceMode {
    type Err = AnalyticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hop" => Ok(Self::Hop),
            "inverse-weight" => Ok(Self::InverseWeight),
            other => Err(AnalyticsError::UnknownDistanceMode(other.to_owned())),
        }
    }
}

impl fmt::Display for DistanceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Hop => "hop",
            Self::InverseWeight => "inverse-weight",
        })
    }
}

/// Parameters a score set was computed with. Unused fields stay `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<DistanceMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weighted: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
}

/// One score per node, or one per edge for [`CentralityKind::EdgeBetweenness`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityScores {
    pub kind: CentralityKind,
    pub params: MetricParams,
    pub directed: bool,
    pub node_ids: Vec<NodeId>,
    /// Edge endpoints as node indices; empty unless scoring edges.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<(usize, usize)>,
    pub scores: Vec<f64>,
}

impl CentralityScores {
    fn for_nodes(kind: CentralityKind, params: MetricParams, g: &WeightedGraph, scores: Vec<f64>) -> Self {
        Self {
            kind,
            params,
            directed: g.is_directed(),
            node_ids: g.node_ids().to_vec(),
            edges: Vec::new(),
            scores,
        }
    }

    pub fn is_edge_scores(&self) -> bool {
        self.kind == CentralityKind::EdgeBetweenness
    }

    pub fn node_score(&self, id: &NodeId) -> Option<f64> {
        if self.is_edge_scores() {
            return None;
        }
        self.node_ids.iter().position(|n| n == id).map(|i| self.scores[i])
    }

    /// Score of the edge between nodes `i` and `j`. For undirected graphs
    /// the endpoint order does not matter.
    pub fn edge_score(&self, i: usize, j: usize) -> Option<f64> {
        let key = if self.directed { (i, j) } else { (i.min(j), i.max(j)) };
        self.edges.iter().position(|&e| e == key).map(|p| self.scores[p])
    }

    /// Human-readable subject of the `k`-th score: a node id or `a->b` / `a--b`.
    pub fn label(&self, k: usize) -> String {
        if self.is_edge_scores() {
            let (i, j) = self.edges[k];
            let sep = if self.directed { "->" } else { "--" };
            format!("{}{sep}{}", self.node_ids[i], self.node_ids[j])
        } else {
            self.node_ids[k].to_string()
        }
    }

    /// Score indices in descending score order, ties by index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.scores.len()).collect();
        order.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]).then(a.cmp(&b)));
        order
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("unknown metric '{0}'")]
    UnknownMetric(String),
    #[error("unknown distance mode '{0}' (expected hop or inverse-weight)")]
    UnknownDistanceMode(String),
    #[error("expected {expected} scores, got {found}")]
    WrongKind {
        expected: CentralityKind,
        found: CentralityKind,
    },
    #[error("degree histogram needs unweighted degree counts")]
    WeightedHistogram,
    #[error("undefined on empty graph: the graph has no edges")]
    EmptyGraph,
    #[error("metric requires an undirected graph; symmetrize first")]
    Directed,
    #[error("damping must lie in (0, 1), got {0}")]
    InvalidDamping(f64),
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("no convergence after {iterations} iterations")]
    NotConverged { iterations: usize, last: Vec<f64> },
    #[error("dominant eigenvalue {eigenvalue} is shared by {components} disconnected components; eigenvector is not unique")]
    DegenerateEigenspace { eigenvalue: f64, components: usize },
}

fn check_tol(tol: f64) -> Result<(), AnalyticsError> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(AnalyticsError::InvalidTolerance(tol))
    }
}
