use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use umapmix::autodiff::Tensor;
use umapmix::data::{Scaler, TabularDataset};
use umapmix::exec::Exec;
use umapmix::nn::{Activation, EmbedSpec, HeadSpec, ModelSpec, SplitModel};
use umapmix::trainer::*;
use umapmix::Error;

fn blobs(seed: u64, n: usize) -> (Tensor, Tensor) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..n * 3).map(|_| rng.random_range(-2.0..2.0)).collect();
    let y: Vec<f64> = x.chunks(3).map(|r| r[0].sin() + 0.5 * r[1] * r[2]).collect();
    (Tensor::matrix(n, 3, x).unwrap(), Tensor::column(y).unwrap())
}

fn small() -> ModelSpec {
    ModelSpec {
        embed: EmbedSpec::Mlp { widths: vec![16, 8], activation: Activation::Relu },
        head: HeadSpec::default(),
    }
}

fn cfg(method: Method) -> TrainConfig {
    TrainConfig { method, model: small(), epochs: 3, k: 5, batch_size: 16, lr: 1e-2, ..TrainConfig::default() }
}

#[test]
fn gamma_zero_equals_dropping_the_umap_term() {
    let (x, y) = blobs(1, 60);
    for method in [Method::UmapMixup, Method::SupervisedUmap] {
        let a = train(&TrainConfig { gamma: 0.0, ..cfg(method) }, &x, &y).unwrap();
        let b = train(&TrainConfig { umap_term: false, ..cfg(method) }, &x, &y).unwrap();
        assert_eq!(a.0, b.0, "{method}");
        for (s, t) in a.1.steps.iter().zip(&b.1.steps) {
            assert_eq!(s.supervised.to_bits(), t.supervised.to_bits());
            assert_eq!(s.total.to_bits(), t.total.to_bits());
        }
    }
}

#[test]
fn unit_lambda_without_umap_term_is_plain_regression_on_edge_sources() {
    let (x, y) = blobs(2, 60);
    let c = TrainConfig { gamma: 0.0, fixed_lambda: Some(1.0), ..cfg(Method::UmapMixup) };
    let scaler = Scaler::fit(&x, &y);
    let mut checked = 0;
    train_observed(&c, &x, &y, Some(scaler), &mut |ev| {
        let pred = ev.model.predict(&ev.x.select_rows(ev.primary)).unwrap();
        let target = ev.y.select_rows(ev.primary);
        let n = ev.primary.len() as f64;
        let mse: f64 = pred.data().iter().zip(target.data()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n;
        assert!(ev.lambdas.iter().all(|&l| l == 1.0));
        assert_eq!(ev.log.supervised, mse, "epoch {} step {}", ev.epoch, ev.step);
        checked += 1;
    })
    .unwrap();
    assert!(checked > 0);
}

#[test]
fn total_is_supervised_plus_weighted_umap() {
    let (x, y) = blobs(3, 60);
    let c = TrainConfig { gamma: 0.37, ..cfg(Method::UmapMixup) };
    let (_, report) = train(&c, &x, &y).unwrap();
    for s in &report.steps {
        assert!(s.umap > 0.0);
        assert_eq!(s.total, s.supervised + 0.37 * s.umap);
    }
}

#[test]
fn erm_fits_a_line() {
    let n = 200;
    let xs: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
    let x = Tensor::column(xs.clone()).unwrap();
    let y = Tensor::column(xs.iter().map(|v| 2.0 * v + 1.0).collect()).unwrap();
    let c = TrainConfig { method: Method::Erm, epochs: 500, lr: 1e-3, ..TrainConfig::default() };
    let (model, _) = train(&c, &x, &y).unwrap();
    let err = evaluate(&model, &x, &y).unwrap();
    assert!(err < 0.05, "train rmse {err}");
}

#[test]
fn every_method_runs_and_is_reproducible() {
    let (x, y) = blobs(4, 50);
    for method in Method::ALL {
        let c = cfg(method);
        let (m1, r1) = train(&c, &x, &y).unwrap();
        let (m2, r2) = train(&c, &x, &y).unwrap();
        assert_eq!(m1, m2, "{method}");
        assert_eq!(r1, r2, "{method}");
        assert_eq!(r1.to_csv(), r2.to_csv());
        assert_eq!(r1.graph_checksum.is_some(), c.needs_graph());
        let (m3, _) = train(&TrainConfig { seed: 1, ..c }, &x, &y).unwrap();
        assert_ne!(m1, m3, "{method}");
    }
}

#[test]
fn graph_pairs_option_changes_partners() {
    let (x, y) = blobs(5, 50);
    let uniform = train(&cfg(Method::Mixup), &x, &y).unwrap();
    let graph = train(&TrainConfig { pairs: PairSampling::Graph, ..cfg(Method::Mixup) }, &x, &y).unwrap();
    assert!(graph.1.graph_checksum.is_some());
    assert_ne!(uniform.0, graph.0);
}

#[test]
fn test_rows_never_influence_training() {
    let (x, y) = blobs(6, 80);
    let data = TabularDataset::new(x.clone(), y.clone(), vec!["a".into(), "b".into(), "c".into()], "y".into()).unwrap();
    let train_idx: Vec<usize> = (0..60).collect();
    let tr = data.subset(&train_idx);
    let (_, r1) = train(&cfg(Method::UmapMixup), &tr.x, &tr.y).unwrap();

    // perturb only the held-out rows and retrain on the same training rows
    let mut xd = x.data().to_vec();
    for v in &mut xd[60 * 3..] {
        *v += 100.0;
    }
    let other = TabularDataset::new(Tensor::matrix(80, 3, xd).unwrap(), y, data.feature_names.clone(), "y".into()).unwrap();
    let tr2 = other.subset(&train_idx);
    let (_, r2) = train(&cfg(Method::UmapMixup), &tr2.x, &tr2.y).unwrap();
    assert_eq!(r1.graph_checksum, r2.graph_checksum);
    assert_eq!(r1.input_checksum, r2.input_checksum);
}

#[test]
fn divergence_is_reported() {
    let (x, y) = blobs(7, 40);
    let y = Tensor::column(y.data().iter().map(|v| v * 1e200).collect()).unwrap();
    let c = TrainConfig { method: Method::Erm, standardize: false, ..cfg(Method::Erm) };
    let err = train(&c, &x, &y).unwrap_err();
    assert!(matches!(err, Error::Diverged { epoch: 0 }), "{err}");
}

#[test]
fn invalid_configs_are_usage_errors() {
    let (x, y) = blobs(8, 20);
    for c in [
        TrainConfig { k: 20, ..cfg(Method::UmapMixup) },
        TrainConfig { alpha: 0.0, ..cfg(Method::Mixup) },
        TrainConfig { batch_size: 0, ..cfg(Method::Erm) },
        TrainConfig { lr: -1.0, ..cfg(Method::Erm) },
    ] {
        assert!(train(&c, &x, &y).unwrap_err().is_usage());
    }
}

#[test]
fn benchmark_is_identical_across_execution_modes() {
    let (x, y) = blobs(9, 60);
    let data = TabularDataset::new(x, y, vec!["a".into(), "b".into(), "c".into()], "y".into()).unwrap();
    let methods = [Method::Erm, Method::UmapMixup];
    let opts = BenchmarkOptions { folds: 3, ..BenchmarkOptions::default() };
    let seq = run_benchmark("toy", &data, &methods, &TrainConfig { exec: Exec::Sequential, ..cfg(Method::Erm) }, &opts).unwrap();
    let par = run_benchmark("toy", &data, &methods, &TrainConfig { exec: Exec::Parallel, ..cfg(Method::Erm) }, &opts).unwrap();
    let folds = run_benchmark("toy", &data, &methods, &cfg(Method::Erm), &BenchmarkOptions { parallel_folds: 2, ..opts }).unwrap();
    assert_eq!(seq, par);
    assert_eq!(seq, folds);
    assert_eq!(folds_csv(&seq), folds_csv(&par));
    assert_eq!(summary_table(&seq).lines().count(), 3);
    assert_eq!(summary_csv(&seq).lines().count(), 3);
    assert_eq!(seq[0].rmse.len(), 3);
}

#[test]
fn lstm_series_benchmark_runs() {
    let prices: Vec<f64> = (0..120).map(|i| 100.0 + (i as f64 * 0.2).sin() * 5.0).collect();
    let base = TrainConfig { model: ModelSpec::lstm(4), epochs: 2, k: 5, ..TrainConfig::default() };
    let opts = SeriesOptions { window: 10, seeds: vec![0, 1], ..SeriesOptions::default() };
    let res = run_series_benchmark("wave", &prices, &[Method::Erm, Method::UmapMixup], &base, &opts).unwrap();
    assert_eq!(res.len(), 2);
    assert!(res.iter().all(|r| r.rmse.len() == 2 && r.rmse.iter().all(|v| v.is_finite())));
}

#[test]
fn trained_model_embeds_with_its_scaler() {
    let (x, y) = blobs(10, 40);
    let (model, _) = train(&cfg(Method::ManifoldMixup), &x, &y).unwrap();
    let s = model.scaler().unwrap();
    let z = model.embed_raw(&x).unwrap();
    assert_eq!(z, model.embed(&s.transform_x(&x).unwrap()).unwrap());
    let loaded = {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.model");
        model.save(&p).unwrap();
        SplitModel::load(&p).unwrap()
    };
    assert_eq!(loaded.predict_raw(&x).unwrap(), model.predict_raw(&x).unwrap());
}
