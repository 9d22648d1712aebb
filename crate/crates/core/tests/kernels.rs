#[path = "common/oracles.rs"]
mod oracles;

use std::collections::BTreeMap;

use archgraph_core::diffusion::{
    exp_kernel, laplacian, lexp_kernel, propagate, rl_kernel, rl_series, rwr_kernel, series_terms_for,
};
use archgraph_core::nalgebra::DMatrix;
use archgraph_core::{NodeId, WeightedGraph};
use oracles::{
    laplacian_of, max_abs_diff, neumann_series, random_connected, rwr_direct, rwr_walk, spectral_function,
    symmetric_spectral_radius, tail_bound_terms,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn uniform_weight<R: Rng>(rng: &mut R) -> f64 {
    5.0 - rng.random_range(0.0..5.0)
}

#[test]
fn laplacian_and_spectral_radius_match_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..30 {
        let n = rng.random_range(2..=20);
        let g = random_connected(&mut rng, n, 0.3, uniform_weight);
        let b = laplacian(&g).unwrap();
        let l = laplacian_of(&g);
        assert!(max_abs_diff(&b.laplacian, &l) < 1e-12);
        let rho = symmetric_spectral_radius(&l);
        assert!((b.spectral_radius - rho).abs() < 1e-7 * rho, "{} vs {rho}", b.spectral_radius);
    }
}

#[test]
fn rl_matches_truncated_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..40 {
        let n = rng.random_range(2..=20);
        let g = random_connected(&mut rng, n, 0.25, uniform_weight);
        let b = laplacian(&g).unwrap();
        let l = laplacian_of(&g);
        let rho = symmetric_spectral_radius(&l);
        for _ in 0..3 {
            let alpha = rng.random_range(0.05..0.95) * b.alpha_max;
            let k = rl_kernel(&b, alpha).unwrap();
            let q = alpha * rho;
            let terms = tail_bound_terms(q, 1e-7);
            assert_eq!(series_terms_for(q, 1e-7), terms);
            let oracle = neumann_series(&l, alpha, terms);
            assert!(max_abs_diff(&k.p, &oracle) < 1e-6);
            let lib = rl_series(&b, alpha, terms).unwrap();
            assert!(max_abs_diff(&k.p, &lib) < 1e-6);
        }
    }
}

#[test]
fn k2_closed_forms() {
    let g = WeightedGraph::from_edges(2, &[(0, 1, 1.0)], false).unwrap();
    let b = laplacian(&g).unwrap();
    let rl = rl_kernel(&b, 0.25).unwrap();
    let want = DMatrix::from_row_slice(2, 2, &[5.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 5.0 / 6.0]);
    assert!(max_abs_diff(&rl.p, &want) < 1e-12);

    for alpha in [0.1, 1.0, 3.0] {
        let e = exp_kernel(&g, alpha).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[alpha.cosh(), alpha.sinh(), alpha.sinh(), alpha.cosh()]);
        assert!(max_abs_diff(&e.p, &want) <= 1e-9 * alpha.cosh());

        let le = lexp_kernel(&b, alpha).unwrap();
        let d = (-2.0 * alpha).exp();
        let want = DMatrix::from_row_slice(2, 2, &[(1.0 + d) / 2.0, (1.0 - d) / 2.0, (1.0 - d) / 2.0, (1.0 + d) / 2.0]);
        assert!(max_abs_diff(&le.p, &want) < 1e-9);
    }

    let r = rwr_kernel(&g, 0.5).unwrap();
    assert!((r.influence(0, 0) - 2.0 / 3.0).abs() < 1e-9);
    assert!((r.influence(0, 1) - 1.0 / 3.0).abs() < 1e-9);
}

#[test]
fn exp_kernels_match_spectral_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let n = rng.random_range(2..=12);
        let g = random_connected(&mut rng, n, 0.3, uniform_weight);
        let b = laplacian(&g).unwrap();
        let l = laplacian_of(&g);
        for alpha in [0.1, 1.0, 3.0] {
            let want = spectral_function(&l, |x| (-alpha * x).exp());
            assert!(max_abs_diff(&lexp_kernel(&b, alpha).unwrap().p, &want) < 1e-9);
            let want = spectral_function(g.adjacency(), |x| (alpha * x).exp());
            let got = exp_kernel(&g, alpha).unwrap().p;
            let scale = want.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            assert!(max_abs_diff(&got, &want) < 1e-9 * scale);
        }
    }
}

#[test]
fn lexp_converges_to_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..30 {
        let n = rng.random_range(2..=6);
        let g = random_connected(&mut rng, n, 0.4, |_| 1.0);
        let k = lexp_kernel(&laplacian(&g).unwrap(), 50.0).unwrap();
        for x in k.p.iter() {
            assert!((x - 1.0 / n as f64).abs() < 1e-6, "{x}");
        }
    }
}

#[test]
fn rwr_matches_linear_solve_including_dangling_nodes() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let n = rng.random_range(2..=10);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && rng.random_bool(0.3) {
                    edges.push((i, j, uniform_weight(&mut rng)));
                }
            }
        }
        let g = WeightedGraph::from_edges(n, &edges, true).unwrap();
        let c = rng.random_range(0.1..0.9);
        let k = rwr_kernel(&g, c).unwrap();
        for s in 0..n {
            let want = rwr_direct(&g, c, s);
            let walked = rwr_walk(&g, c, s);
            for (j, w) in want.iter().enumerate() {
                assert!((k.influence(s, j) - w).abs() < 1e-8);
                assert!((k.influence(s, j) - walked[j]).abs() < 1e-8);
            }
        }
    }
}

fn arb_connected(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (2..=max_n, any::<u64>(), 0.0..0.6f64).prop_map(|(n, seed, p)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_connected(&mut rng, n, p, uniform_weight)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rl_is_stochastic_symmetric_and_diagonally_dominant(g in arb_connected(15), frac in 0.01..0.99f64) {
        let b = laplacian(&g).unwrap();
        let k = rl_kernel(&b, frac * b.alpha_max).unwrap().p;
        let n = g.len();
        for i in 0..n {
            prop_assert!((k.row(i).sum() - 1.0).abs() < 1e-9);
            for j in 0..n {
                prop_assert!((k[(i, j)] - k[(j, i)]).abs() < 1e-9);
                prop_assert!(k[(i, j)] >= -1e-12 && k[(i, j)] <= 1.0 + 1e-12);
                prop_assert!(k[(i, i)] >= k[(i, j)] - 1e-12);
            }
        }
    }

    #[test]
    fn rwr_distributions_sum_to_one(g in arb_connected(12), c in 0.05..0.95f64) {
        let k = rwr_kernel(&g, c).unwrap();
        for s in 0..g.len() {
            let total: f64 = (0..g.len()).map(|j| k.influence(s, j)).sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rwr_seed_score_grows_with_restart(g in arb_connected(10)) {
        let ks: Vec<_> = (1..=9).map(|c| rwr_kernel(&g, c as f64 / 10.0).unwrap()).collect();
        for s in 0..g.len() {
            for w in ks.windows(2) {
                prop_assert!(w[1].influence(s, s) >= w[0].influence(s, s) - 1e-9);
            }
        }
    }

    #[test]
    fn lexp_rows_sum_to_one(g in arb_connected(12), alpha in 0.01..10.0f64) {
        let k = lexp_kernel(&laplacian(&g).unwrap(), alpha).unwrap().p;
        for i in 0..g.len() {
            prop_assert!((k.row(i).sum() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn propagate_ranking_ignores_uniform_scaling(g in arb_connected(10), scale in 0.01..100.0f64, pick in any::<u64>()) {
        let b = laplacian(&g).unwrap();
        let k = rl_kernel(&b, b.default_alpha()).unwrap();
        let n = g.len();
        let mut seeds = BTreeMap::new();
        for (i, id) in g.node_ids().iter().enumerate() {
            if pick >> (i % 64) & 1 == 1 || i == 0 {
                seeds.insert(id.clone(), 1.0 + (i % 3) as f64);
            }
        }
        let scaled: BTreeMap<NodeId, f64> = seeds.iter().map(|(k, v)| (k.clone(), v * scale)).collect();
        let a = propagate(&k, &seeds).unwrap();
        let b = propagate(&k, &scaled).unwrap();
        for i in 0..n {
            prop_assert!((a.scores[i] * scale - b.scores[i]).abs() <= 1e-9 * b.scores[i].abs().max(1.0));
        }
        for w in b.ranking.windows(2) {
            prop_assert!(a.scores[w[0]] >= a.scores[w[1]] - 1e-12 * a.scores[w[0]].abs().max(1.0));
        }
    }
}
