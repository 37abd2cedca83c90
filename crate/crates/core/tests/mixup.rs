use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use umapmix::autodiff::{Tape, Tensor};
use umapmix::mixup::*;
use umapmix::nn::{Activation, EmbedSpec, HeadSpec, ModelSpec, ParamGroup, SplitModel};

fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Tensor {
    Tensor::matrix(r, c, (0..r * c).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn model(head_hidden: Vec<usize>, seed: u64) -> SplitModel {
    let spec = ModelSpec {
        embed: EmbedSpec::Mlp { widths: vec![8, 4], activation: Activation::Tanh },
        head: HeadSpec { hidden: head_hidden, activation: Activation::Tanh },
    };
    SplitModel::init(spec, 3, 2, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn mixed(m: &SplitModel, x: &Tensor, x2: &Tensor, lam: &[f64]) -> Tensor {
    let tape = Tape::new();
    let bound = m.bind(&tape, false);
    umap_mixup_forward(&bound, tape.constant(x.clone()), tape.constant(x2.clone()), lam).unwrap().to_tensor()
}

fn close(a: &Tensor, b: &Tensor, tol: f64) -> bool {
    a.shape() == b.shape() && a.data().iter().zip(b.data()).all(|(u, v)| (u - v).abs() <= tol)
}

#[test]
fn endpoints_recover_plain_predictions() {
    let m = model(vec![5], 1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (x, x2) = (random(&mut rng, 4, 3), random(&mut rng, 4, 3));
    assert_eq!(mixed(&m, &x, &x2, &[1.0; 4]), m.predict(&x).unwrap());
    assert_eq!(mixed(&m, &x, &x2, &[0.0; 4]), m.predict(&x2).unwrap());
}

#[test]
fn linear_head_mixes_like_outputs() {
    // with a linear head, mixing embeddings equals mixing predictions
    let m = model(vec![], 3);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (x, x2) = (random(&mut rng, 5, 3), random(&mut rng, 5, 3));
    let lam = [0.1, 0.3, 0.5, 0.7, 0.9];
    let (p, p2) = (m.predict(&x).unwrap(), m.predict(&x2).unwrap());
    let mut want = Vec::new();
    for r in 0..5 {
        for c in 0..2 {
            want.push(lam[r] * p.get(r, c) + (1.0 - lam[r]) * p2.get(r, c));
        }
    }
    assert!(close(&mixed(&m, &x, &x2, &lam), &Tensor::matrix(5, 2, want).unwrap(), 1e-12));
}

#[test]
fn nonlinear_head_differs_from_output_mixing() {
    let m = model(vec![6], 5);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (x, x2) = (random(&mut rng, 3, 3), random(&mut rng, 3, 3));
    let lam = [0.5; 3];
    let (p, p2) = (m.predict(&x).unwrap(), m.predict(&x2).unwrap());
    let out: Vec<f64> = p.data().iter().zip(p2.data()).map(|(a, b)| 0.5 * a + 0.5 * b).collect();
    let got = mixed(&m, &x, &x2, &lam);
    let gap = got.data().iter().zip(&out).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(gap > 1e-6, "gap {gap}");
}

#[test]
fn manifold_and_umap_forward_agree() {
    let m = model(vec![5], 7);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (x, x2) = (random(&mut rng, 4, 3), random(&mut rng, 4, 3));
    let lam = [0.2, 0.4, 0.6, 0.8];
    let tape = Tape::new();
    let bound = m.bind(&tape, false);
    let a = manifold_mixup_forward(&bound, tape.constant(x.clone()), tape.constant(x2.clone()), &lam).unwrap();
    assert_eq!(a.to_tensor(), mixed(&m, &x, &x2, &lam));
}

#[test]
fn gradient_flows_through_both_branches() {
    let m = model(vec![5], 9);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (x, x2) = (random(&mut rng, 2, 3), random(&mut rng, 2, 3));
    let lam = [0.3, 0.6];
    let tape = Tape::new();
    let bound = m.bind(&tape, false);
    let (xa, xb) = (tape.param(x.clone()), tape.param(x2.clone()));
    let out = umap_mixup_forward(&bound, xa, xb, &lam).unwrap().sum();
    let g = tape.backward(out).unwrap();
    assert!(g.get(xa).unwrap().data().iter().any(|v| *v != 0.0));
    assert!(g.get(xb).unwrap().data().iter().any(|v| *v != 0.0));

    // finite difference on one input coordinate of the partner
    let h = 1e-6;
    let shift = |d: f64| {
        let mut data = x2.data().to_vec();
        data[1] += d;
        mixed(&m, &x, &Tensor::matrix(2, 3, data).unwrap(), &lam).data().iter().sum::<f64>()
    };
    let numeric = (shift(h) - shift(-h)) / (2.0 * h);
    assert!((numeric - g.get(xb).unwrap().data()[1]).abs() < 1e-7);
}

#[test]
fn mixed_loss_uses_mixed_targets() {
    let tape = Tape::new();
    let pred = tape.constant(Tensor::matrix(2, 1, vec![1.0, 2.0]).unwrap());
    let y = tape.constant(Tensor::matrix(2, 1, vec![0.0, 4.0]).unwrap());
    let y2 = tape.constant(Tensor::matrix(2, 1, vec![2.0, 0.0]).unwrap());
    // targets 0.5*0+0.5*2 = 1 and 0.25*4 = 1, squared errors 0 and 1
    let loss = mixed_loss(pred, y, y2, &[0.5, 0.25], LossKind::SquaredError).unwrap();
    assert_eq!(loss.item(), Some(0.5));
}

#[test]
fn unknown_loss_is_rejected() {
    assert!("huber".parse::<LossKind>().unwrap_err().is_usage());
}

#[test]
fn mixup_gradients_reach_both_groups() {
    let m = model(vec![5], 11);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (x, x2) = (random(&mut rng, 3, 3), random(&mut rng, 3, 3));
    let (y, y2) = (random(&mut rng, 3, 2), random(&mut rng, 3, 2));
    let lam = [0.2, 0.5, 0.9];
    let tape = Tape::new();
    let bound = m.bind(&tape, true);
    let pred = umap_mixup_forward(&bound, tape.constant(x), tape.constant(x2), &lam).unwrap();
    let loss = mixed_loss(pred, tape.constant(y), tape.constant(y2), &lam, LossKind::SquaredError).unwrap();
    let grads = bound.grads(&tape.backward(loss).unwrap());
    for group in [ParamGroup::Embed, ParamGroup::Head] {
        let norm: f64 = m
            .params()
            .iter()
            .zip(&grads)
            .filter(|(p, _)| p.group == group)
            .flat_map(|(_, g)| g.data().iter().map(|v| v * v))
            .sum();
        assert!(norm > 0.0, "{group}");
    }
}

proptest! {
    #[test]
    fn swapping_partners_flips_lambda(seed in any::<u64>(), lam in 0.0f64..=1.0) {
        let m = model(vec![4], seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let (x, x2) = (random(&mut rng, 1, 3), random(&mut rng, 1, 3));
        let a = mixed(&m, &x, &x2, &[lam]);
        let b = mixed(&m, &x2, &x, &[1.0 - lam]);
        prop_assert!(close(&a, &b, 1e-12));
    }

    #[test]
    fn input_mix_is_convex(a in -10.0f64..10.0, b in -10.0f64..10.0, lam in 0.0f64..=1.0) {
        let t = |v| Tensor::scalar(v);
        let (x, y) = mix_inputs(&t(a), &t(a), &t(b), &t(b), lam).unwrap();
        let v = x.item().unwrap();
        prop_assert!(v >= a.min(b) - 1e-12 && v <= a.max(b) + 1e-12);
        prop_assert_eq!(x, y);
        let pair = MixedPair { i: 0, j: 1, lambda: lam };
        prop_assert_eq!(pair.target(&[a], &[b])[0], v);
    }

    #[test]
    fn out_of_range_lambda_rejected(lam in prop_oneof![-5.0f64..-1e-9, 1.0f64 + 1e-9..5.0]) {
        prop_assert!(mix_inputs(&Tensor::scalar(0.0), &Tensor::scalar(0.0), &Tensor::scalar(1.0), &Tensor::scalar(1.0), lam).is_err());
    }
}
