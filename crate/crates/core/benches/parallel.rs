//! Sequential against rayon execution for the data-parallel stages: exact
//! k-NN, graph construction and fold-level benchmark runs.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use umapmix::autodiff::Tensor;
use umapmix::data::TabularDataset;
use umapmix::exec::Exec;
use umapmix::graph::{build_graph, knn, Metric};
use umapmix::nn::{Activation, EmbedSpec, HeadSpec, ModelSpec};
use umapmix::trainer::{run_benchmark, BenchmarkOptions, Method, TrainConfig};

fn cloud(n: usize, d: usize) -> Tensor {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    Tensor::matrix(n, d, (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn bench_knn(c: &mut Criterion) {
    let mut group = c.benchmark_group("knn");
    for n in [500, 1000] {
        let x = cloud(n, 8);
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &x, |b, x| {
                b.iter(|| knn(x, 15, Metric::Euclidean, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_graph(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_graph");
    for n in [500, 1000] {
        let x = cloud(n, 8);
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &x, |b, x| {
                b.iter(|| build_graph(x, 15, Metric::Euclidean, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_folds(c: &mut Criterion) {
    let x = cloud(200, 4);
    let y = Tensor::column(x.data().chunks(4).map(|r| r[0] - r[1] * r[2] + r[3].sin()).collect()).unwrap();
    let names = (0..4).map(|i| format!("x{i}")).collect();
    let data = TabularDataset::new(x, y, names, "y".into()).unwrap();
    let base = TrainConfig {
        model: ModelSpec {
            embed: EmbedSpec::Mlp { widths: vec![16, 8], activation: Activation::Relu },
            head: HeadSpec::default(),
        },
        epochs: 3,
        ..TrainConfig::default()
    };
    let methods = [Method::Erm, Method::UmapMixup];
    let mut group = c.benchmark_group("benchmark_folds");
    group.sample_size(10);
    for (name, threads) in [("sequential", 1), ("parallel", 4)] {
        let opts = BenchmarkOptions { folds: 4, parallel_folds: threads, ..BenchmarkOptions::default() };
        group.bench_function(name, |b| b.iter(|| run_benchmark("bench", &data, &methods, &base, &opts).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, bench_knn, bench_graph, bench_folds);
criterion_main!(benches);
