use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::DiffusionError;
use crate::graph::WeightedGraph;
use crate::model::NodeId;

/// Relative accuracy of the spectral radius estimate.
pub const SPECTRAL_TOL: f64 = 1e-9;

/// `L = D - A` of a symmetric graph with its spectral radius and the
/// resulting upper bound on the regularization parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplacianBundle {
    pub node_ids: Vec<NodeId>,
    pub laplacian: DMatrix<f64>,
    /// Diagonal of `D`: weighted degree of each node.
    pub degree: DVector<f64>,
    pub spectral_radius: f64,
    /// `1 / ρ(L)`; infinite when `L = 0`.
    pub alpha_max: f64,
}

impl LaplacianBundle {
    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    /// Midpoint of the admissible range, the default for what-if runs.
    /// Falls back to 1 when the bound is infinite.
    pub fn default_alpha(&self) -> f64 {
        if self.alpha_max.is_finite() {
            0.5 * self.alpha_max
        } else {
            1.0
        }
    }
}

pub fn laplacian(g: &WeightedGraph) -> Result<LaplacianBundle, DiffusionError> {
    if g.is_directed() || !g.is_symmetric() {
        return Err(DiffusionError::Asymmetric);
    }
    let n = g.len();
    let a = g.adjacency();
    let degree = DVector::from_fn(n, |i, _| a.row(i).sum());
    let laplacian = DMatrix::from_diagonal(&degree) - a;
    let spectral_radius = spectral_radius(&laplacian)?;
    let alpha_max = if spectral_radius > 0.0 {
        1.0 / spectral_radius
    } else {
        f64::INFINITY
    };
    Ok(LaplacianBundle {
        node_ids: g.node_ids().to_vec(),
        laplacian,
        degree,
        spectral_radius,
        alpha_max,
    })
}

/// Iteration cap for the power method on an `n`-node Laplacian.
pub fn power_iteration_cap(n: usize) -> usize {
    (10 * n * n).max(100_000)
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration from a fixed pseudo-random start.
///
/// The Rayleigh quotient converges like `r^(2k)` with `r = λ₂/λ₁`; the ratio
/// of successive changes estimates `r²`, which bounds the remaining error.
/// Iteration stops once that bound drops below [`SPECTRAL_TOL`] relative.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64, DiffusionError> {
    let n = m.nrows();
    if n == 0 || m.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x = DVector::from_fn(n, |_, _| rng.random_range(0.5..1.5) * if rng.random_bool(0.5) { 1.0 } else { -1.0 });
    x.normalize_mut();
    let mut mu = x.dot(&(m * &x));
    let mut last_change = f64::INFINITY;
    let cap = power_iteration_cap(n);
    for _ in 0..cap {
        let mut y = m * &x;
        let norm = y.norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        y /= norm;
        let next = y.dot(&(m * &y));
        let change = (next - mu).abs();
        x = y;
        mu = next;
        if change == 0.0 {
            return Ok(mu);
        }
        let ratio = if last_change.is_finite() && last_change > 0.0 {
            (change / last_change).min(0.999_999)
        } else {
            0.999_999
        };
        last_change = change;
        let remaining = change * ratio / (1.0 - ratio);
        if remaining <= SPECTRAL_TOL * mu.abs() || change <= f64::EPSILON * mu.abs() {
            return Ok(mu);
        }
    }
    Err(DiffusionError::SpectralRadiusNotConverged {
        iterations: cap,
        estimate: mu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k2_laplacian() {
        let g = WeightedGraph::from_edges(2, &[(0, 1, 1.0)], false).unwrap();
        let b = laplacian(&g).unwrap();
        assert_eq!(b.laplacian.as_slice(), &[1.0, -1.0, -1.0, 1.0]);
        assert!((b.spectral_radius - 2.0).abs() < 1e-9 * 2.0);
        assert!((b.alpha_max - 0.5).abs() < 1e-9);
    }

    #[test]
    fn single_node_has_infinite_bound() {
        let g = WeightedGraph::from_edges(1, &[], false).unwrap();
        let b = laplacian(&g).unwrap();
        assert_eq!(b.laplacian.as_slice(), &[0.0]);
        assert_eq!(b.spectral_radius, 0.0);
        assert!(b.alpha_max.is_infinite());
    }

    #[test]
    fn triangle_radius_is_three() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)], false).unwrap();
        assert!((laplacian(&g).unwrap().spectral_radius - 3.0).abs() < 3e-9);
    }

    #[test]
    fn close_leading_eigenvalues_still_converge() {
        let edges = [
            (0, 1, 2.1026901463464553),
            (0, 2, 2.338874700414737),
            (0, 4, 4.41574790572588),
            (2, 3, 3.859629900729893),
            (2, 4, 2.6525787741263693),
            (3, 5, 2.8512632654653713),
            (4, 5, 0.7525977923453304),
        ];
        let g = WeightedGraph::from_edges(6, &edges, false).unwrap();
        let rho = laplacian(&g).unwrap().spectral_radius;
        assert!((rho - 13.092093731001759).abs() < 1e-9 * rho);
    }

    #[test]
    fn rejects_directed() {
        let g = WeightedGraph::from_edges(2, &[(0, 1, 1.0)], true).unwrap();
        assert_eq!(laplacian(&g).unwrap_err(), DiffusionError::Asymmetric);
    }

    #[test]
    fn rows_sum_to_zero() {
        let g = WeightedGraph::from_edges(4, &[(0, 1, 0.5), (1, 2, 2.0), (2, 3, 3.0), (0, 3, 1.5)], false).unwrap();
        let b = laplacian(&g).unwrap();
        for i in 0..4 {
            assert!(b.laplacian.row(i).sum().abs() < 1e-12);
        }
    }
}
