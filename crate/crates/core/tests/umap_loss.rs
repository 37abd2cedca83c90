use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use umapmix::autodiff::gradcheck::check_gradients;
use umapmix::autodiff::{Tape, Tensor};
use umapmix::exec::Exec;
use umapmix::graph::{build_graph, DataGraph, Edge, LocalScale, Metric};
use umapmix::sampler::{batches, sample_epoch};
use umapmix::umap_loss::*;

// Golden values from scipy.optimize.curve_fit (Levenberg-Marquardt, p0 = (1, 1))
// on the same 300-point grid.
const GOLDEN: &[(f64, f64, f64)] = &[
    (0.1, 1.5769436134456798, 0.8950607194372566),
    (0.0, 1.9328090880855, 0.7904946611253174),
    (0.25, 1.121436443368381, 1.0574995588762892),
    (0.5, 0.5830298055312382, 1.3341673830015464),
];

#[test]
fn fit_ab_matches_least_squares_oracle() {
    for &(md, a, b) in GOLDEN {
        let kp = fit_ab(md).unwrap();
        assert!((kp.a - a).abs() < 1e-6 && (kp.b - b).abs() < 1e-6, "min_dist {md}: {kp:?}");
    }
}

#[test]
fn default_fit_deviation_below_tolerance() {
    let kp = fit_ab(DEFAULT_MIN_DIST).unwrap();
    let dev = fit_grid()
        .into_iter()
        .map(|d| (kp.q(d) - target_curve(d, DEFAULT_MIN_DIST)).abs())
        .fold(0.0, f64::max);
    assert!(dev < 0.03, "{dev}");
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Tensor {
    Tensor::matrix(n, d, (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

#[test]
fn full_entropy_zero_when_q_equals_p() {
    // build P from the embedding's own similarities, so Q matches P on every pair
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let kp = KernelParams::default();
    let n = 8;
    let z = random_points(&mut rng, n, 2);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            edges.push(Edge { i, j, p: kp.q_from_sq((0..2).map(|c| (z.get(i, c) - z.get(j, c)).powi(2)).sum()) });
        }
    }
    let s = LocalScale { rho: 0.0, sigma: 1.0 };
    let g = DataGraph::from_edges(n, 2, Metric::Euclidean, edges, vec![s; n]).unwrap();
    let v = cross_entropy_full(&g, &z, &kp).unwrap();
    assert!(v.abs() < 1e-3, "{v}");
}

#[test]
fn batch_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let kp = KernelParams::default();
    for _ in 0..20 {
        let z = random_points(&mut rng, 6, 3);
        let pairs = BatchPairs {
            src: vec![0, 1, 0, 0, 1, 1],
            dst: vec![2, 3, 4, 5, 0, 5],
            p: vec![0.8, 1.0, 0.0, 0.3, 1.0, 0.0],
            n_pos: 2,
        };
        let r = check_gradients(&[z], |v| cross_entropy_batch_tape(&pairs, v[0], &kp)).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}

#[test]
fn full_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let x = random_points(&mut rng, 12, 3);
    let g = build_graph(&x, 4, Metric::Euclidean, Exec::Sequential).unwrap();
    let kp = KernelParams::default();
    for _ in 0..20 {
        let z = random_points(&mut rng, 12, 2);
        let r = check_gradients(&[z], |v| cross_entropy_full_tape(&g, v[0], &kp)).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}

#[test]
fn batch_gradient_direction_tracks_full_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let n = 50;
    let x = random_points(&mut rng, n, 4);
    let g = build_graph(&x, 10, Metric::Euclidean, Exec::Sequential).unwrap();
    let kp = KernelParams::default();
    let z = random_points(&mut rng, n, 2);

    let full = {
        let tape = Tape::new();
        let zv = tape.param(z.clone());
        let loss = cross_entropy_full_tape(&g, zv, &kp).unwrap();
        tape.backward(loss).unwrap().get(zv).unwrap().clone()
    };
    let mut mean = vec![0.0; z.len()];
    let epochs = 400;
    for _ in 0..epochs {
        let epoch = sample_epoch(&g, 5, &mut rng).unwrap();
        for batch in batches(&epoch, usize::MAX, &mut rng) {
            let pairs = batch.pairs(&g);
            let tape = Tape::new();
            let zv = tape.param(z.clone());
            let loss = cross_entropy_batch_tape(&pairs, zv, &kp).unwrap();
            let grad = tape.backward(loss).unwrap().get(zv).unwrap().clone();
            for (m, v) in mean.iter_mut().zip(grad.data()) {
                *m += v / epochs as f64;
            }
        }
    }
    let dot: f64 = mean.iter().zip(full.data()).map(|(a, b)| a * b).sum();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let cosine = dot / (norm(&mean) * norm(full.data()));
    assert!(cosine > 0.5, "cosine {cosine}");
}

proptest! {
    #[test]
    fn q_symmetric_and_in_range(zi in prop::collection::vec(-5.0f64..5.0, 3), zj in prop::collection::vec(-5.0f64..5.0, 3), md in 0.0f64..1.0) {
        let kp = fit_ab(md).unwrap();
        let a = q_similarity(&zi, &zj, &kp).unwrap();
        let b = q_similarity(&zj, &zi, &kp).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(a > 0.0 && a <= 1.0);
    }

    #[test]
    fn pair_entropy_nonnegative(p in 0.0f64..=1.0, q in 0.0f64..=1.0) {
        prop_assert!(pair_cross_entropy(p, q) >= -1e-12);
    }

    #[test]
    fn negative_term_falls_and_positive_term_rises_with_distance(d in 0.2f64..3.0) {
        // derivative sign of each batch term with respect to the pair distance
        let kp = KernelParams::default();
        let h = 1e-6;
        let term = |d: f64, positive: bool| {
            let pairs = BatchPairs { src: vec![0], dst: vec![1], p: vec![if positive { 1.0 } else { 0.0 }], n_pos: positive as usize };
            let z = Tensor::matrix(2, 1, vec![0.0, d]).unwrap();
            cross_entropy_batch(&pairs, &z, &kp).unwrap()
        };
        let q = kp.q(d);
        prop_assume!(q > Q_EPS + 1e-6 && q < 1.0 - Q_EPS - 1e-6);
        prop_assert!(term(d + h, false) < term(d - h, false));
        prop_assert!(term(d + h, true) > term(d - h, true));
    }
}
