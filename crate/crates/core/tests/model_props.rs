// SPDX-License-Identifier: Apache-2.0

use magneto::dense::CMatrix;
use magneto::filters::{gso, precompute_features, FilterSign, FilterSpec};
use magneto::generate::directed_flow;
use magneto::graph::Symmetrization;
use magneto::model::{
    complex_init, forward, init_weights, rayleigh_sigma, softmax_rows, train, ModelParams, TrainConfig,
};
use magneto::split::{split_nodes, SplitFractions};
use ndarray::{Array2, Axis};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn complex_features(n: usize, c: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let re = Array2::from_shape_simple_fn((n, c), || rng.random_range(-2.0..2.0));
    let im = Array2::from_shape_simple_fn((n, c), || rng.random_range(-2.0..2.0));
    CMatrix { re, im }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn probabilities_sum_to_one(n in 1usize..20, c in 1usize..8, h in 1usize..16, k in 2usize..6, seed in any::<u64>(), degenerate in any::<bool>()) {
        let params = init_weights(c, h, k, seed, degenerate);
        let p = forward(&params, &complex_features(n, c, seed), 0.0, false, None).unwrap();
        prop_assert_eq!(p.dim(), (n, k));
        for row in p.rows() {
            prop_assert!((row.sum() - 1.0).abs() <= 1e-9);
            prop_assert!(row.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn softmax_survives_huge_logits(v in prop::collection::vec(-1e300f64..1e300, 1..10)) {
        let p = softmax_rows(&Array2::from_shape_vec((1, v.len()), v).unwrap());
        prop_assert!((p.sum() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn rows_permute_with_the_input(n in 2usize..20, c in 1usize..6, seed in any::<u64>(), shift in 1usize..19) {
        let params = init_weights(c, 8, 3, seed, false);
        let x = complex_features(n, c, seed ^ 7);
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let xp = CMatrix { re: x.re.select(Axis(0), &perm), im: x.im.select(Axis(0), &perm) };
        let p = forward(&params, &x, 0.0, false, None).unwrap();
        let pp = forward(&params, &xp, 0.0, false, None).unwrap();
        let diff = (&p.select(Axis(0), &perm) - &pp).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(diff <= 1e-12);
    }

    #[test]
    fn degenerate_mode_is_a_real_tanh_network(n in 1usize..15, c in 1usize..6, h in 1usize..10, k in 2usize..5, seed in any::<u64>()) {
        let params = init_weights(c, h, k, seed, true);
        prop_assert!(params.w0.im.iter().all(|&v| v == 0.0));

        // Independent reference: Glorot-uniform W0 then W1 from one ChaCha8 stream.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l0 = (6.0 / (c + h) as f64).sqrt();
        let w0 = Array2::from_shape_simple_fn((c, h), || rng.random_range(-l0..l0));
        let l1 = (6.0 / (h + k) as f64).sqrt();
        let w1 = Array2::from_shape_simple_fn((h, k), || rng.random_range(-l1..l1));
        prop_assert_eq!(&params.w0.re, &w0);
        prop_assert_eq!(&params.w1, &w1);

        let x = complex_features(n, c, seed);
        let x = CMatrix::from_real(x.re);
        let want = softmax_rows(&x.re.dot(&w0).mapv(f64::tanh).dot(&w1));
        let got = forward(&params, &x, 0.0, false, None).unwrap();
        let diff = (&got - &want).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(diff <= 1e-12);
    }
}

#[test]
fn rayleigh_modulus_has_the_expected_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (rows, cols) = (400, 250);
    let w = complex_init(&mut rng, rows, cols);
    let sigma = rayleigh_sigma(rows, cols);
    let mean = w.re.iter().zip(&w.im).map(|(r, i)| r.hypot(*i)).sum::<f64>() / (rows * cols) as f64;
    let want = sigma * (std::f64::consts::PI / 2.0).sqrt();
    assert!((mean - want).abs() / want < 0.02, "{mean} vs {want}");
    // Uniform phase: mean of the unit phasor is near zero.
    let mean_re = w.re.iter().zip(&w.im).map(|(r, i)| r / r.hypot(*i)).sum::<f64>() / (rows * cols) as f64;
    assert!(mean_re.abs() < 0.01);
}

#[test]
fn zero_first_layer_gives_uniform_output() {
    let c = 4;
    let params = ModelParams {
        w0: CMatrix::zeros(5, c),
        w1: Array2::eye(c),
        real_degenerate: false,
        architecture: Default::default(),
    };
    let p = forward(&params, &complex_features(7, 5, 3), 0.0, false, None).unwrap();
    assert!(p.iter().all(|&v| (v - 0.25).abs() < 1e-15));
}

fn flow_accuracy(q: f64, seeds: &[u64]) -> f64 {
    let ds = directed_flow(50, 4, 3, 0.6, 8, 0).unwrap();
    let x = CMatrix::from_real(ds.features.row_normalized().0);
    let spec = FilterSpec::linear_rank(4, FilterSign::LowPass);
    let p = gso(&ds.graph, q, FilterSign::LowPass, Symmetrization::HalfSum).unwrap();
    let xbar = precompute_features(&p, &x, &spec).unwrap().xbar;
    let y = ds.labels.as_slice();
    let degenerate = q == 0.0;
    let accs: Vec<f64> = seeds
        .iter()
        .map(|&s| {
            let m = split_nodes(y, SplitFractions::WEBPAGE, s).unwrap();
            let out = train(&xbar, y, &m.train, &m.val, 4, degenerate, &TrainConfig::default(), s).unwrap();
            magneto::model::evaluate(&out.params, &xbar, y, &m.test).unwrap()
        })
        .collect();
    accs.iter().sum::<f64>() / accs.len() as f64
}

// Class is carried only by edge direction, which the real operator cannot see.
#[test]
fn direction_aware_charge_helps_on_directed_flow() {
    let seeds = [0, 1, 2];
    let zero = flow_accuracy(0.0, &seeds);
    let quarter = flow_accuracy(0.25, &seeds);
    assert!(quarter > zero + 0.1, "q=1/4 {quarter:.3} vs q=0 {zero:.3}");
}
