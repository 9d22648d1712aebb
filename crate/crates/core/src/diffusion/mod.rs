//! Impact diffusion over the component graph.
//!
//! A kernel matrix `P` says how strongly an impact starting at one component
//! reaches every other. Four kernels are provided: the regularized Laplacian
//! `(I + αL)⁻¹`, random walk with restart, the exponential diffusion kernel
//! `exp(αA)` and the Laplacian exponential kernel `exp(-αL)`. [`propagate`]
//! applies a kernel to a set of seeded components.
//!
//! The Laplacian kernels need an undirected graph; symmetrize mixed graphs
//! with `(A + Aᵀ)/2` first. Random walk with restart follows edge direction.

mod kernels;
mod laplacian;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::NodeId;

pub use kernels::{
    exp_kernel, expm, lexp_kernel, rl_kernel, rl_series, rwr_kernel, series_terms_for,
};
pub use laplacian::{laplacian, power_iteration_cap, spectral_radius, LaplacianBundle, SPECTRAL_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffusionError {
    #[error("Laplacian kernels need a symmetric graph; symmetrize it first")]
    Asymmetric,
    #[error("alpha {alpha} out of range: require 0 < alpha < 1/rho(L) = {alpha_max}")]
    AlphaOutOfRange { alpha: f64, alpha_max: f64 },
    #[error("alpha must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("restart probability must lie in (0, 1), got {0}")]
    RestartOutOfRange(f64),
    #[error("no convergence after {iterations} iterations")]
    NotConverged { iterations: usize },
    #[error("spectral radius did not converge after {iterations} iterations (estimate {estimate})")]
    SpectralRadiusNotConverged { iterations: usize, estimate: f64 },
    #[error("internal error: kernel system is singular")]
    Singular,
    #[error("at least one seed is required")]
    NoSeeds,
    #[error("seed intensity for '{0}' must be positive and finite")]
    NonPositiveIntensity(NodeId),
    #[error("unknown seed component '{0}'")]
    UnknownSeed(NodeId),
    #[error("unknown kernel '{0}' (expected rl, rwr, exp or lexp)")]
    UnknownKernel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    RegularizedLaplacian,
    RandomWalkRestart,
    ExponentialDiffusion,
    LaplacianExponential,
}

impl KernelKind {
    pub fn short_name(self) -> &'static str {
        match self {
            Self::RegularizedLaplacian => "rl",
            Self::RandomWalkRestart => "rwr",
            Self::ExponentialDiffusion => "exp",
            Self::LaplacianExponential => "lexp",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for KernelKind {
    type Err = DiffusionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rl" => Ok(Self::RegularizedLaplacian),
            "rwr" => Ok(Self::RandomWalkRestart),
            "exp" => Ok(Self::ExponentialDiffusion),
            "lexp" => Ok(Self::LaplacianExponential),
            other => Err(DiffusionError::UnknownKernel(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restart: Option<f64>,
}

impl KernelParams {
    pub fn alpha(alpha: f64) -> Self {
        Self {
            alpha: Some(alpha),
            restart: None,
        }
    }

    pub fn restart(restart: f64) -> Self {
        Self {
            alpha: None,
            restart: Some(restart),
        }
    }
}

/// Which axis of `P` holds the distribution of a single seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedAxis {
    /// Row `i` is the impact of seed `i` (symmetric kernels).
    Rows,
    /// Column `s` is the distribution of seed `s` (random walk with restart).
    Columns,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMatrix {
    pub kind: KernelKind,
    pub params: KernelParams,
    pub node_ids: Vec<NodeId>,
    pub p: DMatrix<f64>,
    pub row_normalized: bool,
    pub seed_axis: SeedAxis,
}

impl KernelMatrix {
    /// Impact of seed `seed` on node `node`.
    pub fn influence(&self, seed: usize, node: usize) -> f64 {
        match self.seed_axis {
            SeedAxis::Rows => self.p[(seed, node)],
            SeedAxis::Columns => self.p[(node, seed)],
        }
    }

    /// Rescales every seed distribution to sum to 1, so any kernel reads as
    /// impact probabilities. Distributions summing to 0 are left alone.
    pub fn normalized(&self) -> Self {
        let mut out = self.clone();
        let n = self.p.nrows();
        for s in 0..n {
            let total: f64 = (0..n).map(|j| self.influence(s, j)).sum();
            if total > 0.0 {
                for j in 0..n {
                    match self.seed_axis {
                        SeedAxis::Rows => out.p[(s, j)] /= total,
                        SeedAxis::Columns => out.p[(j, s)] /= total,
                    }
                }
            }
        }
        out.row_normalized = true;
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelProvenance {
    pub kind: KernelKind,
    pub params: KernelParams,
    pub row_normalized: bool,
}

/// Per-component impact scores of one diffusion run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactVector {
    pub node_ids: Vec<NodeId>,
    pub scores: Vec<f64>,
    pub seeds: BTreeMap<NodeId, f64>,
    pub kernel: KernelProvenance,
    /// Node indices by descending score, ties by index.
    pub ranking: Vec<usize>,
}

impl ImpactVector {
    pub fn score(&self, id: &NodeId) -> Option<f64> {
        self.node_ids.iter().position(|n| n == id).map(|i| self.scores[i])
    }

    /// The `k` highest-scoring components with their scores.
    pub fn top(&self, k: usize) -> Vec<(&NodeId, f64)> {
        self.ranking.iter().take(k).map(|&i| (&self.node_ids[i], self.scores[i])).collect()
    }
}

/// Spreads seed intensities through a kernel: `score_j = Σ_i x_i · P(i → j)`.
/// A single seed of intensity 1 reads that seed's distribution.
pub fn propagate(kernel: &KernelMatrix, seeds: &BTreeMap<NodeId, f64>) -> Result<ImpactVector, DiffusionError> {
    if seeds.is_empty() {
        return Err(DiffusionError::NoSeeds);
    }
    let n = kernel.node_ids.len();
    let mut x = vec![0.0; n];
    for (id, &intensity) in seeds {
        let i = kernel
            .node_ids
            .iter()
            .position(|n| n == id)
            .ok_or_else(|| DiffusionError::UnknownSeed(id.clone()))?;
        if !(intensity.is_finite() && intensity > 0.0) {
            return Err(DiffusionError::NonPositiveIntensity(id.clone()));
        }
        x[i] = intensity;
    }
    let scores: Vec<f64> = (0..n)
        .map(|j| (0..n).filter(|&i| x[i] != 0.0).map(|i| x[i] * kernel.influence(i, j)).sum())
        .collect();
    let mut ranking: Vec<usize> = (0..n).collect();
    ranking.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    Ok(ImpactVector {
        node_ids: kernel.node_ids.clone(),
        scores,
        seeds: seeds.clone(),
        kernel: KernelProvenance {
            kind: kernel.kind,
            params: kernel.params,
            row_normalized: kernel.row_normalized,
        },
        ranking,
    })
}
