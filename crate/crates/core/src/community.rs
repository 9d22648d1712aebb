//! Community detection: Girvan–Newman edge removal and seeded label
//! propagation, scored by weighted Newman–Girvan modularity.
//!
//! Results are deterministic. Ties go to the smallest node index or label,
//! and label propagation visits nodes in an order drawn from a seeded RNG.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::{edge_betweenness, DistanceMode};
use crate::graph::WeightedGraph;
use crate::model::NodeId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CommunityError {
    #[error("partition assigns {assigned} nodes but the graph has {nodes}")]
    Uncovered { assigned: usize, nodes: usize },
    #[error("requested {k} communities but the graph has {n} nodes")]
    TooManyCommunities { k: usize, n: usize },
    #[error("community count must be at least 1")]
    ZeroCommunities,
    #[error("Girvan-Newman requires an undirected graph; symmetrize first")]
    Directed,
}

/// Assignment of every node to exactly one community, ids contiguous from 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub node_ids: Vec<NodeId>,
    pub membership: Vec<usize>,
    pub count: usize,
    pub modularity: f64,
}

impl Partition {
    /// Member node indices of each community, in community id order.
    pub fn communities(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (node, &c) in self.membership.iter().enumerate() {
            out[c].push(node);
        }
        out
    }
}

/// Relabels arbitrary labels to `0..count` in order of first appearance by node index.
fn canonical(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = std::collections::HashMap::new();
    let membership = labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect();
    (membership, map.len())
}

fn undirected_weights(g: &WeightedGraph) -> DMatrix<f64> {
    if g.is_directed() {
        g.symmetrized().adjacency().clone()
    } else {
        g.adjacency().clone()
    }
}

/// Weighted modularity `Q = Σ_c (e_cc - a_c²)`. Directed graphs are read
/// through `(A + Aᵀ) / 2`; a graph without edges has `Q = 0`.
pub fn modularity(g: &WeightedGraph, membership: &[usize]) -> Result<f64, CommunityError> {
    if membership.len() != g.len() {
        return Err(CommunityError::Uncovered {
            assigned: membership.len(),
            nodes: g.len(),
        });
    }
    let a = undirected_weights(g);
    let two_m = a.sum();
    if two_m == 0.0 {
        return Ok(0.0);
    }
    let count = membership.iter().copied().max().map_or(0, |m| m + 1);
    let mut inside = vec![0.0; count];
    let mut degree = vec![0.0; count];
    let n = g.len();
    for i in 0..n {
        let ci = membership[i];
        for j in 0..n {
            let w = a[(i, j)];
            degree[ci] += w;
            if membership[j] == ci {
                inside[ci] += w;
            }
        }
    }
    Ok((0..count)
        .map(|c| inside[c] / two_m - (degree[c] / two_m).powi(2))
        .sum())
}

fn partition_of(g: &WeightedGraph, labels: &[usize]) -> Partition {
    let (membership, count) = canonical(labels);
    let modularity = modularity(g, &membership).expect("labels cover the graph");
    Partition {
        node_ids: g.node_ids().to_vec(),
        membership,
        count,
        modularity,
    }
}

fn component_labels(g: &WeightedGraph) -> Vec<usize> {
    let mut labels = vec![0; g.len()];
    for (c, comp) in g.components().into_iter().enumerate() {
        for i in comp {
            labels[i] = c;
        }
    }
    labels
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopRule {
    /// Stop once the graph falls apart into this many components.
    TargetCommunities(usize),
    /// Return the split along the removal sequence with the highest modularity.
    MaxModularity,
}

/// Divisive clustering: repeatedly delete the edge with the highest (hop)
/// edge betweenness and read communities off the connected components.
///
/// Modularity is always scored against the original graph.
pub fn girvan_newman(g: &WeightedGraph, stop: StopRule) -> Result<Partition, CommunityError> {
    if g.is_directed() {
        return Err(CommunityError::Directed);
    }
    let n = g.len();
    if let StopRule::TargetCommunities(k) = stop {
        if k == 0 {
            return Err(CommunityError::ZeroCommunities);
        }
        if k > n {
            return Err(CommunityError::TooManyCommunities { k, n });
        }
    }

    let mut work = g.clone();
    let mut labels = component_labels(&work);
    let mut best = partition_of(g, &labels);
    loop {
        let current = partition_of(g, &labels);
        match stop {
            StopRule::TargetCommunities(k) if current.count >= k => return Ok(current),
            StopRule::MaxModularity if current.modularity > best.modularity => best = current,
            _ => {}
        }
        let eb = edge_betweenness(&work, DistanceMode::Hop, false);
        let Some(&top) = eb.ranking().first() else {
            // no edges left: every node is its own community
            return Ok(match stop {
                StopRule::TargetCommunities(_) => partition_of(g, &labels),
                StopRule::MaxModularity => best,
            });
        };
        let (i, j) = eb.edges[top];
        work = work.without_edge(i, j);
        labels = component_labels(&work);
    }
}

/// Asynchronous label propagation. Each sweep visits the nodes in an order
/// shuffled by a ChaCha RNG seeded with `seed`; a node adopts the label with
/// the largest incident weight among its neighbours, the smallest such label
/// on ties. Stops after a sweep without changes or after `max_iter` sweeps.
pub fn label_propagation(g: &WeightedGraph, seed: u64, max_iter: usize) -> Partition {
    let n = g.len();
    let a = undirected_weights(g);
    let mut labels: Vec<usize> = (0..n).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = vec![0.0; n];
    for _ in 0..max_iter {
        order.shuffle(&mut rng);
        let mut changed = false;
        for &v in &order {
            let mut touched = Vec::new();
            for u in 0..n {
                let w = a[(v, u)];
                if w > 0.0 {
                    if tally[labels[u]] == 0.0 {
                        touched.push(labels[u]);
                    }
                    tally[labels[u]] += w;
                }
            }
            if touched.is_empty() {
                continue;
            }
            let best = touched
                .iter()
                .copied()
                .max_by(|&x, &y| tally[x].total_cmp(&tally[y]).then(y.cmp(&x)))
                .expect("nonempty");
            for l in touched {
                tally[l] = 0.0;
            }
            if best != labels[v] {
                labels[v] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    partition_of(g, &labels)
}
