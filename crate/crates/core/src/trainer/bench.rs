use std::fmt::Write as _;

use super::config::{Method, TrainConfig};
use super::train::{evaluate, train, train_observed};
use crate::data::{chronological_split, split_folds, Scaler, TabularDataset};
use crate::error::{Error, Result};
use crate::exec::Exec;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkResult {
    pub dataset: String,
    pub method: Method,
    /// Test RMSE per fold (or per seed for series runs), in fold order.
    pub rmse: Vec<f64>,
}

impl BenchmarkResult {
    pub fn mean(&self) -> f64 {
        self.rmse.iter().sum::<f64>() / self.rmse.len() as f64
    }

    /// Sample standard deviation (n - 1); zero for a single fold.
    pub fn std(&self) -> f64 {
        let n = self.rmse.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        (self.rmse.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkOptions {
    pub folds: usize,
    pub test_fraction: f64,
    pub seed: u64,
    /// Worker threads for fold-level parallelism; 0 or 1 runs folds in order.
    pub parallel_folds: usize,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        Self { folds: 20, test_fraction: 0.1, seed: 0, parallel_folds: 1 }
    }
}

/// Seed for the model trained on fold `fold`; shared by every method.
pub fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed.wrapping_add(fold as u64)
}

fn run_tasks<T: Send>(
    tasks: usize,
    threads: usize,
    f: impl Fn(usize) -> Result<T> + Send + Sync,
) -> Result<Vec<T>> {
    let exec = if threads > 1 { Exec::Parallel } else { Exec::Sequential };
    exec.with_threads(threads, || exec.map_range(tasks, &f)).into_iter().collect()
}

fn collect(dataset: &str, methods: &[Method], per_task: Vec<f64>, runs: usize) -> Vec<BenchmarkResult> {
    methods
        .iter()
        .enumerate()
        .map(|(m, &method)| BenchmarkResult {
            dataset: dataset.to_string(),
            method,
            rmse: (0..runs).map(|r| per_task[r * methods.len() + m]).collect(),
        })
        .collect()
}

/// For each fold: shuffle-split, standardize and build the graph on the
/// training part only, train every method from the same fold seed, and score
/// test RMSE in original units.
pub fn run_benchmark(
    name: &str,
    data: &TabularDataset,
    methods: &[Method],
    base: &TrainConfig,
    opts: &BenchmarkOptions,
) -> Result<Vec<BenchmarkResult>> {
    if methods.is_empty() {
        return Err(Error::InvalidParameter("no methods to benchmark".into()));
    }
    let folds = split_folds(data.len(), opts.folds, opts.test_fraction, opts.seed)?;
    let inner = if opts.parallel_folds > 1 { Exec::Sequential } else { base.exec };
    let per_task = run_tasks(folds.len() * methods.len(), opts.parallel_folds, |t| {
        let (fold, method) = (t / methods.len(), methods[t % methods.len()]);
        let (tr, te) = (data.subset(&folds[fold].train), data.subset(&folds[fold].test));
        let cfg = TrainConfig { method, seed: fold_seed(opts.seed, fold), exec: inner, ..base.clone() };
        let (model, _) = train(&cfg, &tr.x, &tr.y)?;
        let score = evaluate(&model, &te.x, &te.y)?;
        log::info!("{name} fold {fold} {method}: rmse {score:.4}");
        Ok(score)
    })?;
    Ok(collect(name, methods, per_task, folds.len()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesOptions {
    pub window: usize,
    pub test_fraction: f64,
    /// One model per seed and method.
    pub seeds: Vec<u64>,
    pub parallel: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self { window: 60, test_fraction: 0.2, seeds: (0..5).collect(), parallel: 1 }
    }
}

/// Chronological split of a price series into windowed train/test sets, prices
/// standardized by training-segment statistics, one run per seed.
pub fn run_series_benchmark(
    name: &str,
    prices: &[f64],
    methods: &[Method],
    base: &TrainConfig,
    opts: &SeriesOptions,
) -> Result<Vec<BenchmarkResult>> {
    let SeriesOptions { window, test_fraction, ref seeds, parallel } = *opts;
    if methods.is_empty() || seeds.is_empty() {
        return Err(Error::InvalidParameter("need at least one method and one seed".into()));
    }
    let (train_w, test_w) = chronological_split(prices, window, test_fraction)?;
    let boundary = test_w.target_index[0] - window;
    let scaler = Scaler::fit_shared(&prices[..boundary], window, 1)?;
    let inner = if parallel > 1 { Exec::Sequential } else { base.exec };
    let per_task = run_tasks(seeds.len() * methods.len(), parallel, |t| {
        let (s, method) = (t / methods.len(), methods[t % methods.len()]);
        let cfg = TrainConfig { method, seed: seeds[s], exec: inner, ..base.clone() };
        let (model, _) = train_observed(&cfg, &train_w.x, &train_w.y, Some(scaler.clone()), &mut |_| {})?;
        let score = evaluate(&model, &test_w.x, &test_w.y)?;
        log::info!("{name} seed {} {method}: rmse {score:.4}", seeds[s]);
        Ok(score)
    })?;
    Ok(collect(name, methods, per_task, seeds.len()))
}

/// `dataset,method,fold,rmse`
pub fn folds_csv(results: &[BenchmarkResult]) -> String {
    let mut s = String::from("dataset,method,fold,rmse\n");
    for r in results {
        for (k, v) in r.rmse.iter().enumerate() {
            writeln!(s, "{},{},{k},{v}", r.dataset, r.method).unwrap();
        }
    }
    s
}

/// `dataset,method,mean,std,runs`
pub fn summary_csv(results: &[BenchmarkResult]) -> String {
    let mut s = String::from("dataset,method,mean,std,runs\n");
    for r in results {
        writeln!(s, "{},{},{},{},{}", r.dataset, r.method, r.mean(), r.std(), r.rmse.len()).unwrap();
    }
    s
}

/// One row per dataset, one `mean ± std` column per method.
pub fn summary_table(results: &[BenchmarkResult]) -> String {
    let mut methods: Vec<Method> = Vec::new();
    let mut datasets: Vec<&str> = Vec::new();
    for r in results {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
        if !datasets.contains(&r.dataset.as_str()) {
            datasets.push(&r.dataset);
        }
    }
    let mut s = String::from("| dataset |");
    for m in &methods {
        write!(s, " {m} |").unwrap();
    }
    s.push_str("\n|---|");
    s.push_str(&"---|".repeat(methods.len()));
    s.push('\n');
    for d in datasets {
        write!(s, "| {d} |").unwrap();
        for m in &methods {
            match results.iter().find(|r| r.dataset == d && r.method == *m) {
                Some(r) => write!(s, " {:.2} ± {:.2} |", r.mean(), r.std()).unwrap(),
                None => s.push_str(" - |"),
            }
        }
        s.push('\n');
    }
    s
}
