// SPDX-License-Identifier: Apache-2.0

use magneto::dense::CMatrix;
use magneto::filters::{
    apply_filter_dense, damping, gso, order_for_tolerance, precompute_features, truncation_residual, FilterKind,
    FilterSign, FilterSpec,
};
use magneto::generate::erdos_renyi;
use magneto::graph::Symmetrization;
use ndarray::Array2;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spec_for(kind: FilterKind, k: usize, sign: FilterSign) -> FilterSpec {
    match kind {
        FilterKind::LinearRank => FilterSpec::linear_rank(k, sign),
        FilterKind::MarkovDiffusion => FilterSpec::markov_diffusion(k, sign),
        FilterKind::Ppr => FilterSpec::ppr(k, 0.5, sign),
        FilterKind::Hkpr => FilterSpec::hkpr(k, 2.0, sign),
    }
}

fn kind() -> impl Strategy<Value = FilterKind> {
    prop::sample::select(vec![
        FilterKind::LinearRank,
        FilterKind::MarkovDiffusion,
        FilterKind::Ppr,
        FilterKind::Hkpr,
    ])
}

fn features(n: usize, c: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CMatrix::from_real(Array2::from_shape_fn((n, c), |_| rng.random_range(-1.0..1.0)))
}

/// Σ θ_k P^k X with explicit dense powers.
fn oracle(p: &Array2<Complex64>, x: &Array2<Complex64>, coeffs: &[(usize, f64)]) -> Array2<Complex64> {
    let mut acc = Array2::from_elem(x.raw_dim(), Complex64::new(0.0, 0.0));
    for &(k, c) in coeffs {
        let mut t = x.clone();
        for _ in 0..k {
            t = p.dot(&t);
        }
        acc.scaled_add(Complex64::new(c, 0.0), &t);
    }
    acc
}

fn max_abs_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn precompute_matches_dense_oracle(
        n in 2usize..=30,
        p_edge in 0.05f64..0.5,
        seed in any::<u64>(),
        k in 1usize..=32,
        kind in kind(),
        q in prop::sample::select(vec![0.0, 1.0 / 3.0, 0.5]),
        high in any::<bool>(),
    ) {
        let g = erdos_renyi(n, p_edge, seed);
        let sign = if high { FilterSign::HighPass } else { FilterSign::LowPass };
        let spec = spec_for(kind, k, sign);
        let p = gso(&g, q, sign, Symmetrization::HalfSum).unwrap();
        let x = features(n, 3, seed ^ 1);
        let got = precompute_features(&p, &x, &spec).unwrap().xbar;
        let want = oracle(&p.to_dense(), &x.to_complex(), &damping(&spec).unwrap());
        prop_assert!(max_abs_diff(&got.to_complex(), &want) <= 1e-10);
        let h = apply_filter_dense(&p.to_dense(), &spec).unwrap().sum;
        prop_assert!(max_abs_diff(&h.dot(&x.to_complex()), &want) <= 1e-10);
        if q == 0.0 || q == 0.5 {
            prop_assert_eq!(got.max_abs_imag(), 0.0);
        }
    }

    #[test]
    fn high_pass_flips_odd_powers(n in 2usize..=20, seed in any::<u64>(), k in 1usize..=16, kind in kind(), q in 0.0f64..=0.5) {
        let g = erdos_renyi(n, 0.3, seed);
        let low = spec_for(kind, k, FilterSign::LowPass);
        let high = spec_for(kind, k, FilterSign::HighPass);
        let p = gso(&g, q, FilterSign::LowPass, Symmetrization::HalfSum).unwrap();
        let x = features(n, 2, seed);
        let got = precompute_features(&gso(&g, q, FilterSign::HighPass, Symmetrization::HalfSum).unwrap(), &x, &high)
            .unwrap()
            .xbar;
        let flipped: Vec<(usize, f64)> = damping(&low)
            .unwrap()
            .into_iter()
            .map(|(pw, c)| (pw, if pw % 2 == 1 { -c } else { c }))
            .collect();
        let want = oracle(&p.to_dense(), &x.to_complex(), &flipped);
        prop_assert!(max_abs_diff(&got.to_complex(), &want) <= 1e-10);
    }

    #[test]
    fn lr_and_md_weights_sum_to_one(k in 1usize..=512) {
        let lr = damping(&FilterSpec::linear_rank(k, FilterSign::LowPass)).unwrap();
        let md = damping(&FilterSpec::markov_diffusion(k, FilterSign::LowPass)).unwrap();
        prop_assert!((lr.iter().map(|c| c.1).sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!((md.iter().map(|c| c.1).sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(lr.windows(2).all(|w| w[1].1 < w[0].1));
        prop_assert!(md.iter().all(|c| c.1 == md[0].1));
        prop_assert_eq!(md[0].0, 1);
        prop_assert_eq!(lr.last().unwrap().0, k - 1);
    }

    #[test]
    fn truncation_residual_shrinks(k in 1usize..60, alpha in 0.05f64..0.95, t in 0.1f64..5.0) {
        let a = truncation_residual(&FilterSpec::ppr(k, alpha, FilterSign::LowPass)).unwrap();
        let b = truncation_residual(&FilterSpec::ppr(k + 1, alpha, FilterSign::LowPass)).unwrap();
        prop_assert!(a > 0.0 && b < a);
        let a = truncation_residual(&FilterSpec::hkpr(k, t, FilterSign::LowPass)).unwrap();
        let b = truncation_residual(&FilterSpec::hkpr(k + 1, t, FilterSign::LowPass)).unwrap();
        prop_assert!(b <= a);
        // Mass below ~1e-16 is lost to rounding; before that the decrease is strict.
        if a > 1e-12 {
            prop_assert!(a > 0.0 && b < a);
        }
    }

    #[test]
    fn chosen_order_meets_the_tolerance(alpha in 0.05f64..0.95, t in 0.1f64..5.0) {
        let k = order_for_tolerance(FilterKind::Ppr, Some(alpha), None, 1e-6, 10_000).unwrap();
        prop_assert!(truncation_residual(&FilterSpec::ppr(k, alpha, FilterSign::LowPass)).unwrap() <= 1e-6);
        if k > 1 {
            prop_assert!(truncation_residual(&FilterSpec::ppr(k - 1, alpha, FilterSign::LowPass)).unwrap() > 1e-6);
        }
        let k = order_for_tolerance(FilterKind::Hkpr, None, Some(t), 1e-6, 10_000).unwrap();
        prop_assert!(truncation_residual(&FilterSpec::hkpr(k, t, FilterSign::LowPass)).unwrap() <= 1e-6);
    }

    #[test]
    fn lr_closed_form_matches_sum(n in 2usize..=8, k in 1usize..=12, seed in any::<u64>()) {
        // Random complex P with spectral norm ≤ ½ keeps I − P well conditioned.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = Array2::from_shape_fn((n, n), |_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let frob = p.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let p = p.mapv(|z| z * (0.5 / frob));
        let h = apply_filter_dense(&p, &FilterSpec::linear_rank(k, FilterSign::LowPass)).unwrap();
        prop_assert!(max_abs_diff(&h.sum, h.closed_form.as_ref().unwrap()) <= 1e-9);
    }
}

#[test]
fn ppr_default_order() {
    assert_eq!(order_for_tolerance(FilterKind::Ppr, Some(0.5), None, 1e-6, 100), Some(20));
}
