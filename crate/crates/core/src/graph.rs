//! Numeric adjacency view shared by every analytics routine.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::NodeId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("adjacency is {rows}x{cols} but {ids} node ids were given")]
    ShapeMismatch { rows: usize, cols: usize, ids: usize },
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("adjacency entry ({0}, {1}) is negative or not finite")]
    InvalidWeight(usize, usize),
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("undirected graph has asymmetric adjacency at ({0}, {1})")]
    Asymmetric(usize, usize),
    #[error("edge endpoint {0} out of range")]
    OutOfRange(usize),
}

/// Weighted adjacency matrix with the node ordering that defines its indices.
///
/// `adjacency[(i, j)]` is the strength of the relation from node `i` to node
/// `j`. Zero means no edge. Weights are strengths, never distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph")]
pub struct WeightedGraph {
    node_ids: Vec<NodeId>,
    adjacency: DMatrix<f64>,
    directed: bool,
    #[serde(skip)]
    index: HashMap<NodeId, usize>,
}

#[derive(Deserialize)]
struct RawGraph {
    node_ids: Vec<NodeId>,
    adjacency: DMatrix<f64>,
    directed: bool,
}

impl TryFrom<RawGraph> for WeightedGraph {
    type Error = GraphError;

    fn try_from(raw: RawGraph) -> Result<Self, Self::Error> {
        Self::new(raw.node_ids, raw.adjacency, raw.directed)
    }
}

impl WeightedGraph {
    pub fn new(
        node_ids: Vec<NodeId>,
        adjacency: DMatrix<f64>,
        directed: bool,
    ) -> Result<Self, GraphError> {
        let n = node_ids.len();
        if adjacency.nrows() != n || adjacency.ncols() != n {
            return Err(GraphError::ShapeMismatch {
                rows: adjacency.nrows(),
                cols: adjacency.ncols(),
                ids: n,
            });
        }
        let mut index = HashMap::with_capacity(n);
        for (i, id) in node_ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(GraphError::DuplicateNode(id.clone()));
            }
        }
        for i in 0..n {
            if adjacency[(i, i)] != 0.0 {
                return Err(GraphError::SelfLoop(i));
            }
            for j in 0..n {
                let w = adjacency[(i, j)];
                if !(w.is_finite() && w >= 0.0) {
                    return Err(GraphError::InvalidWeight(i, j));
                }
                if !directed && w != adjacency[(j, i)] {
                    return Err(GraphError::Asymmetric(i, j));
                }
            }
        }
        Ok(Self {
            node_ids,
            adjacency,
            directed,
            index,
        })
    }

    /// Builds a graph over `n` nodes named `n0..n{n-1}` from an edge list.
    ///
    /// Undirected edges are written to both triangles; repeated edges add up.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)], directed: bool) -> Result<Self, GraphError> {
        let ids = (0..n).map(|i| NodeId::new(format!("n{i}"))).collect();
        let mut a = DMatrix::zeros(n, n);
        for &(i, j, w) in edges {
            if i >= n {
                return Err(GraphError::OutOfRange(i));
            }
            if j >= n {
                return Err(GraphError::OutOfRange(j));
            }
            if i == j {
                return Err(GraphError::SelfLoop(i));
            }
            a[(i, j)] += w;
            if !directed {
                a[(j, i)] += w;
            }
        }
        Self::new(ids, a, directed)
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn node_ids(&self) -> &[NodeId] {
        &self.node_ids
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.adjacency[(i, j)]
    }

    pub fn index_of(&self, id: &NodeId) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Out-neighbours of `i` with their weights, in index order.
    pub fn successors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.len()).filter_map(move |j| {
            let w = self.adjacency[(i, j)];
            (w > 0.0).then_some((j, w))
        })
    }

    /// In-neighbours of `i` with their weights, in index order.
    pub fn predecessors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.len()).filter_map(move |j| {
            let w = self.adjacency[(j, i)];
            (w > 0.0).then_some((j, w))
        })
    }

    /// Edges as `(source, target, weight)`. Undirected graphs list each
    /// edge once with `source < target`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            let start = if self.directed { 0 } else { i + 1 };
            for j in start..n {
                let w = self.adjacency[(i, j)];
                if w > 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.adjacency == self.adjacency.transpose()
    }

    /// `(A + Aᵀ) / 2` as an undirected graph. Undirected input is returned unchanged.
    pub fn symmetrized(&self) -> Self {
        if !self.directed {
            return self.clone();
        }
        let a = (&self.adjacency + self.adjacency.transpose()) * 0.5;
        Self {
            node_ids: self.node_ids.clone(),
            adjacency: a,
            directed: false,
            index: self.index.clone(),
        }
    }

    /// Copy with the edge `(i, j)` removed (both directions when undirected).
    pub fn without_edge(&self, i: usize, j: usize) -> Self {
        let mut g = self.clone();
        g.adjacency[(i, j)] = 0.0;
        if !self.directed {
            g.adjacency[(j, i)] = 0.0;
        }
        g
    }

    /// Weakly connected components as lists of node indices, ordered by
    /// their smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut stack = vec![start];
            let mut comp = Vec::new();
            seen[start] = true;
            while let Some(v) = stack.pop() {
                comp.push(v);
                for u in 0..n {
                    if !seen[u] && (self.adjacency[(v, u)] > 0.0 || self.adjacency[(u, v)] > 0.0) {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Restriction of the graph to `nodes`, in the given order.
    pub fn subgraph(&self, nodes: &[usize]) -> Self {
        let ids: Vec<NodeId> = nodes.iter().map(|&i| self.node_ids[i].clone()).collect();
        let a = DMatrix::from_fn(nodes.len(), nodes.len(), |r, c| self.adjacency[(nodes[r], nodes[c])]);
        let index = ids.iter().cloned().enumerate().map(|(i, id)| (id, i)).collect();
        Self {
            node_ids: ids,
            adjacency: a,
            directed: self.directed,
            index,
        }
    }
}
