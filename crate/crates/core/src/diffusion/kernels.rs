use nalgebra::DMatrix;

use super::{DiffusionError, KernelKind, KernelMatrix, KernelParams, LaplacianBundle, SeedAxis};
use crate::graph::WeightedGraph;

fn check_rl_alpha(bundle: &LaplacianBundle, alpha: f64) -> Result<(), DiffusionError> {
    if alpha > 0.0 && alpha < bundle.alpha_max {
        Ok(())
    } else {
        Err(DiffusionError::AlphaOutOfRange {
            alpha,
            alpha_max: bundle.alpha_max,
        })
    }
}

/// Regularized Laplacian kernel `P = (I + αL)⁻¹` by Cholesky solve.
///
/// Requires `0 < α < 1/ρ(L)`. The result is symmetric with unit row sums.
pub fn rl_kernel(bundle: &LaplacianBundle, alpha: f64) -> Result<KernelMatrix, DiffusionError> {
    check_rl_alpha(bundle, alpha)?;
    let n = bundle.len();
    let system = DMatrix::identity(n, n) + &bundle.laplacian * alpha;
    let inverse = system.cholesky().ok_or(DiffusionError::Singular)?.inverse();
    let p = (&inverse + inverse.transpose()) * 0.5;
    Ok(KernelMatrix {
        kind: KernelKind::RegularizedLaplacian,
        params: KernelParams::alpha(alpha),
        node_ids: bundle.node_ids.clone(),
        p,
        row_normalized: false,
        seed_axis: SeedAxis::Rows,
    })
}

/// Truncated Neumann series `Σ_{k=0}^{K} (-αL)^k`.
///
/// Converges to [`rl_kernel`] as `K` grows because `αρ(L) < 1`; kept as an
/// independent check on the direct solve.
pub fn rl_series(bundle: &LaplacianBundle, alpha: f64, terms: usize) -> Result<DMatrix<f64>, DiffusionError> {
    check_rl_alpha(bundle, alpha)?;
    let n = bundle.len();
    let step = &bundle.laplacian * -alpha;
    let mut sum = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for _ in 0..terms {
        term = &term * &step;
        sum += &term;
    }
    Ok(sum)
}

/// Smallest `K` with `q^K / (1 - q) < eps`, where `q = αρ(L) < 1` bounds the
/// spectral norm of each series term.
pub fn series_terms_for(q: f64, eps: f64) -> usize {
    assert!((0.0..1.0).contains(&q), "series ratio must lie in [0, 1)");
    if q == 0.0 {
        return 1;
    }
    let mut k = 0usize;
    let mut tail = 1.0 / (1.0 - q);
    while tail >= eps {
        tail *= q;
        k += 1;
    }
    k
}

fn transition_weights(g: &WeightedGraph) -> (DMatrix<f64>, Vec<bool>) {
    let n = g.len();
    let a = g.adjacency();
    let mut w = DMatrix::zeros(n, n);
    let mut dangling = vec![false; n];
    for i in 0..n {
        let out = a.row(i).sum();
        if out == 0.0 {
            dangling[i] = true;
            continue;
        }
        for j in 0..n {
            w[(i, j)] = a[(i, j)] / out;
        }
    }
    (w, dangling)
}

/// Random walk with restart. Column `s` of the result is the stationary
/// distribution `r = c·e_s + (1-c)·Wᵀr` of a walker that returns to `s`
/// with probability `c` per step; `W` is the row-normalized adjacency, so
/// edge direction is respected. Mass reaching a node without out-edges
/// restarts at `s`, so a seed without out-edges keeps all of its mass.
///
/// With `M = I - (1-c)·Wᵀ` and `u = M⁻¹e_s`, the fixed point is `r = γ·u`
/// where `γ = c / (1 - (1-c)·Σ_{dangling i} u_i)`. `M` is strictly column
/// diagonally dominant, so one LU factorization serves every seed.
pub fn rwr_kernel(g: &WeightedGraph, restart: f64) -> Result<KernelMatrix, DiffusionError> {
    if !(restart > 0.0 && restart < 1.0) {
        return Err(DiffusionError::RestartOutOfRange(restart));
    }
    let n = g.len();
    let (w, dangling) = transition_weights(g);
    let walk = 1.0 - restart;
    let m = DMatrix::identity(n, n) - w.transpose() * walk;
    let mut p = m.lu().try_inverse().ok_or(DiffusionError::Singular)?;
    for s in 0..n {
        if dangling[s] {
            p.column_mut(s).fill(0.0);
            p[(s, s)] = 1.0;
            continue;
        }
        let lost: f64 = (0..n).filter(|&i| dangling[i]).map(|i| p[(i, s)]).sum();
        let gamma = restart / (1.0 - walk * lost);
        p.column_mut(s).scale_mut(gamma);
    }
    Ok(KernelMatrix {
        kind: KernelKind::RandomWalkRestart,
        params: KernelParams::restart(restart),
        node_ids: g.node_ids().to_vec(),
        p,
        row_normalized: false,
        seed_axis: SeedAxis::Columns,
    })
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a truncated Taylor
/// series. The argument is scaled until its 1-norm is at most 1/2, the
/// series runs until a term no longer changes the sum at double precision,
/// and the result is squared back.
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let norm = norm1(m);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let x = m / 2f64.powi(squarings);
    let mut sum = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..=40 {
        term = &term * &x / k as f64;
        sum += &term;
        if norm1(&term) <= f64::EPSILON * 1e-2 * norm1(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

fn check_positive_alpha(alpha: f64) -> Result<(), DiffusionError> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(DiffusionError::InvalidAlpha(alpha))
    }
}

/// Exponential diffusion kernel `exp(αA)` of an undirected graph.
pub fn exp_kernel(g: &WeightedGraph, alpha: f64) -> Result<KernelMatrix, DiffusionError> {
    check_positive_alpha(alpha)?;
    if g.is_directed() {
        return Err(DiffusionError::Asymmetric);
    }
    Ok(KernelMatrix {
        kind: KernelKind::ExponentialDiffusion,
        params: KernelParams::alpha(alpha),
        node_ids: g.node_ids().to_vec(),
        p: expm(&(g.adjacency() * alpha)),
        row_normalized: false,
        seed_axis: SeedAxis::Rows,
    })
}

/// Laplacian exponential diffusion kernel `exp(-αL)`; rows sum to 1.
pub fn lexp_kernel(bundle: &LaplacianBundle, alpha: f64) -> Result<KernelMatrix, DiffusionError> {
    check_positive_alpha(alpha)?;
    Ok(KernelMatrix {
        kind: KernelKind::LaplacianExponential,
        params: KernelParams::alpha(alpha),
        node_ids: bundle.node_ids.clone(),
        p: expm(&(&bundle.laplacian * -alpha)),
        row_normalized: false,
        seed_axis: SeedAxis::Rows,
    })
}
