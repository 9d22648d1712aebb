//! Independent reference implementations used by integration and acceptance
//! tests. Nothing here calls into the algorithms under test.

#![allow(dead_code)]

use archgraph_core::nalgebra::DMatrix;
use archgraph_core::WeightedGraph;
use rand::Rng;

/// Random connected undirected graph on `n` nodes: a random spanning tree
/// plus each remaining pair with probability `extra`. Weights come from
/// `weight`.
pub fn random_connected<R: Rng>(rng: &mut R, n: usize, extra: f64, mut weight: impl FnMut(&mut R) -> f64) -> WeightedGraph {
    let mut edges = Vec::new();
    let mut present = vec![vec![false; n]; n];
    for v in 1..n {
        let u = rng.random_range(0..v);
        present[u][v] = true;
        let w = weight(rng);
        edges.push((u, v, w));
    }
    for i in 0..n {
        for j in i + 1..n {
            if !present[i][j] && rng.random_bool(extra) {
                let w = weight(rng);
                edges.push((i, j, w));
            }
        }
    }
    WeightedGraph::from_edges(n, &edges, false).expect("generated graph is valid")
}

/// Weight in (0, 5]; half the draws come from a small grid so that equal
/// length paths occur under inverse-weight distance too.
pub fn mixed_weight<R: Rng>(rng: &mut R) -> f64 {
    if rng.random_bool(0.5) {
        [0.5, 1.0, 2.0, 2.5, 5.0][rng.random_range(0..5)]
    } else {
        5.0 - rng.random_range(0.0..5.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Length {
    Hop,
    InverseWeight,
}

/// Every simple path between every ordered pair, with its length.
pub struct PathTable {
    pub n: usize,
    /// `paths[s][t]` lists `(length, node sequence)`.
    pub paths: Vec<Vec<Vec<(f64, Vec<usize>)>>>,
}

impl PathTable {
    pub fn enumerate(g: &WeightedGraph, length: Length) -> Self {
        let n = g.len();
        let a = g.adjacency();
        let mut paths = vec![vec![Vec::new(); n]; n];
        for s in 0..n {
            let mut stack = vec![s];
            let mut on = vec![false; n];
            on[s] = true;
            walk(a, length, &mut stack, &mut on, 0.0, &mut paths[s]);
        }
        Self { n, paths }
    }

    /// The shortest paths from `s` to `t`; empty when unreachable.
    pub fn shortest(&self, s: usize, t: usize) -> Vec<&Vec<usize>> {
        let all = &self.paths[s][t];
        let Some(best) = all.iter().map(|(l, _)| *l).reduce(f64::min) else {
            return Vec::new();
        };
        all.iter()
            .filter(|(l, _)| (*l - best).abs() <= 1e-9 * best.max(1.0))
            .map(|(_, p)| p)
            .collect()
    }

    pub fn distance(&self, s: usize, t: usize) -> Option<f64> {
        self.paths[s][t].iter().map(|(l, _)| *l).reduce(f64::min)
    }

    fn pairs(&self, directed: bool) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for s in 0..self.n {
            for t in 0..self.n {
                if s != t && (directed || s < t) {
                    out.push((s, t));
                }
            }
        }
        out
    }

    /// Unnormalized node betweenness.
    pub fn betweenness(&self, directed: bool) -> Vec<f64> {
        let mut b = vec![0.0; self.n];
        for (s, t) in self.pairs(directed) {
            let sp = self.shortest(s, t);
            if sp.is_empty() {
                continue;
            }
            let sigma = sp.len() as f64;
            for p in &sp {
                for &v in &p[1..p.len() - 1] {
                    b[v] += 1.0 / sigma;
                }
            }
        }
        b
    }

    /// Unnormalized edge betweenness keyed by `(i, j)`, with `i < j` when
    /// undirected.
    pub fn edge_betweenness(&self, directed: bool) -> std::collections::BTreeMap<(usize, usize), f64> {
        let mut b = std::collections::BTreeMap::new();
        for (s, t) in self.pairs(directed) {
            let sp = self.shortest(s, t);
            if sp.is_empty() {
                continue;
            }
            let sigma = sp.len() as f64;
            for p in &sp {
                for w in p.windows(2) {
                    let key = if directed { (w[0], w[1]) } else { (w[0].min(w[1]), w[0].max(w[1])) };
                    *b.entry(key).or_insert(0.0) += 1.0 / sigma;
                }
            }
        }
        b
    }

    /// `(r - 1) / ((n - 1) Σ d)` over reachable nodes.
    pub fn closeness(&self) -> Vec<f64> {
        (0..self.n)
            .map(|v| {
                let ds: Vec<f64> = (0..self.n).filter(|&u| u != v).filter_map(|u| self.distance(v, u)).collect();
                let total: f64 = ds.iter().sum();
                if ds.is_empty() || total == 0.0 {
                    0.0
                } else {
                    ds.len() as f64 / ((self.n - 1) as f64 * total)
                }
            })
            .collect()
    }
}

fn walk(
    a: &DMatrix<f64>,
    length: Length,
    stack: &mut Vec<usize>,
    on: &mut [bool],
    len: f64,
    out: &mut [Vec<(f64, Vec<usize>)>],
) {
    let v = *stack.last().expect("nonempty path");
    for u in 0..a.nrows() {
        let w = a[(v, u)];
        if w <= 0.0 || on[u] {
            continue;
        }
        let step = match length {
            Length::Hop => 1.0,
            Length::InverseWeight => 1.0 / w,
        };
        stack.push(u);
        on[u] = true;
        out[u].push((len + step, stack.clone()));
        walk(a, length, stack, on, len + step, out);
        on[u] = false;
        stack.pop();
    }
}

/// Number of neighbours, or in+out arcs when directed.
pub fn degree_count(g: &WeightedGraph) -> Vec<f64> {
    let n = g.len();
    let a = g.adjacency();
    (0..n)
        .map(|i| {
            let mut d = 0usize;
            for j in 0..n {
                if a[(i, j)] > 0.0 {
                    d += 1;
                }
                if g.is_directed() && a[(j, i)] > 0.0 {
                    d += 1;
                }
            }
            d as f64
        })
        .collect()
}

/// `L = D - A` built entry by entry.
pub fn laplacian_of(g: &WeightedGraph) -> DMatrix<f64> {
    let n = g.len();
    let a = g.adjacency();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            (0..n).map(|k| a[(i, k)]).sum()
        } else {
            -a[(i, j)]
        }
    })
}

/// Largest eigenvalue of a symmetric matrix via a full eigendecomposition.
pub fn symmetric_spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// `Σ_{k=0}^{terms} (-αL)^k`.
pub fn neumann_series(l: &DMatrix<f64>, alpha: f64, terms: usize) -> DMatrix<f64> {
    let n = l.nrows();
    let step = l * -alpha;
    let mut sum = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for _ in 0..terms {
        term = &term * &step;
        sum += &term;
    }
    sum
}

/// Smallest `K` with `q^K / (1 - q) < eps`.
pub fn tail_bound_terms(q: f64, eps: f64) -> usize {
    let mut k = 0;
    while q.powi(k as i32) / (1.0 - q) >= eps {
        k += 1;
    }
    k
}

/// `V f(Λ) Vᵀ` for a symmetric matrix.
pub fn spectral_function(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = m.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Stationary RWR distribution for one seed by solving
/// `r = (1-c) Wᵀ r + c e_s` directly, dangling mass restarting at the seed.
pub fn rwr_direct(g: &WeightedGraph, restart: f64, seed: usize) -> Vec<f64> {
    let n = g.len();
    let a = g.adjacency();
    let mut m = DMatrix::identity(n, n);
    for i in 0..n {
        let out: f64 = (0..n).map(|j| a[(i, j)]).sum();
        for j in 0..n {
            let p = if out > 0.0 {
                a[(i, j)] / out
            } else if j == seed {
                1.0
            } else {
                0.0
            };
            m[(j, i)] -= (1.0 - restart) * p;
        }
    }
    let mut rhs = archgraph_core::nalgebra::DVector::zeros(n);
    rhs[seed] = restart;
    m.lu().solve(&rhs).expect("nonsingular").iter().copied().collect()
}

/// Same distribution by following the walk: the mass still moving after
/// each step is pushed along out-edges, and restarts are collected at the
/// seed, until the moving mass is below `1e-14`.
pub fn rwr_walk(g: &WeightedGraph, restart: f64, seed: usize) -> Vec<f64> {
    let n = g.len();
    let a = g.adjacency();
    let mut settled = vec![0.0; n];
    let mut moving = vec![0.0; n];
    moving[seed] = 1.0;
    while moving.iter().sum::<f64>() > 1e-14 {
        let mut next = vec![0.0; n];
        for i in 0..n {
            if moving[i] == 0.0 {
                continue;
            }
            settled[i] += restart * moving[i];
            let out: f64 = (0..n).map(|j| a[(i, j)]).sum();
            let walking = (1.0 - restart) * moving[i];
            if out == 0.0 {
                next[seed] += walking;
            } else {
                for j in 0..n {
                    next[j] += walking * a[(i, j)] / out;
                }
            }
        }
        moving = next;
    }
    settled
}
