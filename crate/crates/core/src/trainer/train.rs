use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Method, PairSampling, TrainConfig};
use crate::autodiff::{Tape, Tensor};
use crate::data::Scaler;
use crate::error::{Error, Result};
use crate::graph::{build_graph, DataGraph};
use crate::mixup::{mix_rows, mixed_head};
use crate::nn::{sample_lambda, AdamConfig, AdamState, SplitModel};
use crate::sampler::{batches, sample_epoch};
use crate::umap_loss::{cross_entropy_batch_tape, BatchPairs, KernelParams};

/// Mean losses over one epoch's steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub steps: usize,
    pub supervised: f64,
    pub umap: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLog {
    pub epoch: usize,
    pub step: usize,
    pub supervised: f64,
    /// Zero for methods without the UMAP term.
    pub umap: f64,
    pub total: f64,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub method: Method,
    pub epochs: Vec<EpochLog>,
    pub steps: Vec<StepLog>,
    pub graph_checksum: Option<u64>,
    /// Checksum of the standardized training features and targets.
    pub input_checksum: u64,
    pub wall_clock_secs: f64,
}

/// Equality of everything except the wall clock.
impl PartialEq for TrainReport {
    fn eq(&self, other: &Self) -> bool {
        self.method == other.method
            && self.epochs == other.epochs
            && self.steps == other.steps
            && self.graph_checksum == other.graph_checksum
            && self.input_checksum == other.input_checksum
    }
}

impl TrainReport {
    /// `epoch,steps,supervised,umap,total` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,steps,supervised,umap,total\n");
        for e in &self.epochs {
            s.push_str(&format!("{},{},{},{},{}\n", e.epoch, e.steps, e.supervised, e.umap, e.total));
        }
        s
    }
}

/// State visible to an observer just before each parameter update.
pub struct StepEvent<'a> {
    pub epoch: usize,
    pub step: usize,
    /// Primary sample of each row (edge source for the graph methods).
    pub primary: &'a [usize],
    /// Mixing partner of each row; empty when nothing is mixed.
    pub partner: &'a [usize],
    pub lambdas: &'a [f64],
    pub log: StepLog,
    /// Model before the update.
    pub model: &'a SplitModel,
    /// Standardized training features and targets.
    pub x: &'a Tensor,
    pub y: &'a Tensor,
}

pub(crate) fn checksum(t: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in t {
        for b in v.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

struct Step {
    primary: Vec<usize>,
    partner: Vec<usize>,
    lambdas: Vec<f64>,
    umap: Option<(Vec<usize>, BatchPairs)>,
}

fn draw_lambdas(cfg: &TrainConfig, count: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    match cfg.fixed_lambda {
        Some(l) => Ok(vec![l; count]),
        None => (0..count).map(|_| sample_lambda(cfg.alpha, rng)).collect(),
    }
}

/// Builds one epoch's steps. Randomness is drawn in a fixed order: epoch
/// sampling (edges or partners), then mixing ratios, then the batch shuffle.
fn plan_epoch(cfg: &TrainConfig, n: usize, graph: Option<&DataGraph>, rng: &mut ChaCha8Rng) -> Result<Vec<Step>> {
    match cfg.method {
        Method::Erm => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            Ok(order
                .chunks(cfg.batch_size)
                .map(|c| Step { primary: c.to_vec(), partner: Vec::new(), lambdas: Vec::new(), umap: None })
                .collect())
        }
        Method::Mixup | Method::ManifoldMixup => {
            let partners: Vec<usize> = match (cfg.pairs, graph) {
                (PairSampling::Graph, Some(g)) => (0..n)
                    .map(|i| {
                        let nb = g.neighbors(i);
                        if nb.is_empty() { rng.random_range(0..n) } else { nb[rng.random_range(0..nb.len())].0 }
                    })
                    .collect(),
                _ => (0..n).map(|_| rng.random_range(0..n)).collect(),
            };
            let lambdas = draw_lambdas(cfg, n, rng)?;
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            Ok(order
                .chunks(cfg.batch_size)
                .map(|c| Step {
                    primary: c.to_vec(),
                    partner: c.iter().map(|&i| partners[i]).collect(),
                    lambdas: c.iter().map(|&i| lambdas[i]).collect(),
                    umap: None,
                })
                .collect())
        }
        Method::UmapMixup | Method::SupervisedUmap => {
            let g = graph.expect("graph built for graph methods");
            let epoch = sample_epoch(g, cfg.negatives, rng)?;
            let mixing = cfg.method == Method::UmapMixup;
            let lambdas = if mixing { draw_lambdas(cfg, epoch.positives.len(), rng)? } else { Vec::new() };
            Ok(batches(&epoch, cfg.batch_size, rng)
                .into_iter()
                .map(|b| Step {
                    primary: b.positives.iter().map(|e| e.0).collect(),
                    partner: if mixing { b.positives.iter().map(|e| e.1).collect() } else { Vec::new() },
                    lambdas: if mixing { b.ids.iter().map(|&k| lambdas[k]).collect() } else { Vec::new() },
                    umap: Some(b.local_pairs(g)),
                })
                .collect())
        }
    }
}

struct StepLosses {
    supervised: f64,
    umap: f64,
    total: f64,
    grads: Vec<Tensor>,
}

fn run_step(
    cfg: &TrainConfig,
    model: &SplitModel,
    kp: &KernelParams,
    x: &Tensor,
    y: &Tensor,
    step: &Step,
) -> Result<StepLosses> {
    let tape = Tape::new();
    let bound = model.bind(&tape, true);
    let y_a = tape.constant(y.select_rows(&step.primary));

    let (supervised, umap) = match (cfg.method, &step.umap) {
        (Method::Erm, _) => {
            let (_, pred) = bound.forward(tape.constant(x.select_rows(&step.primary)))?;
            (cfg.loss.apply(pred, y_a)?, None)
        }
        (Method::Mixup, _) => {
            let xa = tape.constant(x.select_rows(&step.primary));
            let xb = tape.constant(x.select_rows(&step.partner));
            let (_, pred) = bound.forward(mix_rows(xa, xb, &step.lambdas)?)?;
            let target = mix_rows(y_a, tape.constant(y.select_rows(&step.partner)), &step.lambdas)?;
            (cfg.loss.apply(pred, target)?, None)
        }
        (Method::ManifoldMixup, _) => {
            let mut verts: Vec<usize> = step.primary.iter().chain(&step.partner).copied().collect();
            verts.sort_unstable();
            verts.dedup();
            let pos = |v: &[usize]| -> Vec<usize> { v.iter().map(|i| verts.binary_search(i).unwrap()).collect() };
            let z = bound.embed(tape.constant(x.select_rows(&verts)))?;
            let pred = mixed_head(&bound, z.gather_rows(&pos(&step.primary))?, z.gather_rows(&pos(&step.partner))?, &step.lambdas)?;
            let target = mix_rows(y_a, tape.constant(y.select_rows(&step.partner)), &step.lambdas)?;
            (cfg.loss.apply(pred, target)?, None)
        }
        (Method::UmapMixup, Some((verts, pairs))) => {
            let z = bound.embed(tape.constant(x.select_rows(verts)))?;
            let n_pos = pairs.n_pos;
            let zi = z.gather_rows(&pairs.src[..n_pos])?;
            let zj = z.gather_rows(&pairs.dst[..n_pos])?;
            let pred = mixed_head(&bound, zi, zj, &step.lambdas)?;
            let target = mix_rows(y_a, tape.constant(y.select_rows(&step.partner)), &step.lambdas)?;
            let sup = cfg.loss.apply(pred, target)?;
            let umap = cfg.umap_term.then(|| cross_entropy_batch_tape(pairs, z, kp)).transpose()?;
            (sup, umap)
        }
        (Method::SupervisedUmap, Some((verts, pairs))) => {
            let z = bound.embed(tape.constant(x.select_rows(verts)))?;
            let pred = bound.head(z.gather_rows(&pairs.src[..pairs.n_pos])?)?;
            let sup = cfg.loss.apply(pred, y_a)?;
            let umap = cfg.umap_term.then(|| cross_entropy_batch_tape(pairs, z, kp)).transpose()?;
            (sup, umap)
        }
        _ => unreachable!("graph methods always carry a batch"),
    };
    let total = match umap {
        Some(u) => supervised.add(u.scale(cfg.gamma))?,
        None => supervised,
    };
    let (s, u, t) = (
        supervised.item().unwrap_or(f64::NAN),
        umap.and_then(|u| u.item()).unwrap_or(0.0),
        total.item().unwrap_or(f64::NAN),
    );
    if !t.is_finite() {
        return Ok(StepLosses { supervised: s, umap: u, total: t, grads: Vec::new() });
    }
    let grads = bound.grads(&tape.backward(total)?);
    Ok(StepLosses { supervised: s, umap: u, total: t, grads })
}

/// Trains with column-wise standardization fit on `(x, y)` (if enabled).
pub fn train(cfg: &TrainConfig, x: &Tensor, y: &Tensor) -> Result<(SplitModel, TrainReport)> {
    let scaler = cfg.standardize.then(|| Scaler::fit(x, y));
    train_observed(cfg, x, y, scaler, &mut |_| {})
}

/// Trains on raw `(x, y)` standardized by `scaler`, calling `observer` before
/// every parameter update. The returned model carries the scaler.
pub fn train_observed(
    cfg: &TrainConfig,
    x_raw: &Tensor,
    y_raw: &Tensor,
    scaler: Option<Scaler>,
    observer: &mut dyn FnMut(&StepEvent),
) -> Result<(SplitModel, TrainReport)> {
    cfg.validate()?;
    let n = x_raw.rows();
    if y_raw.rows() != n {
        return Err(Error::shape("train", format!("{n} feature rows vs {} target rows", y_raw.rows())));
    }
    let (x, y) = match &scaler {
        Some(s) => (s.transform_x(x_raw)?, s.transform_y(y_raw)?),
        None => (x_raw.clone(), y_raw.clone()),
    };
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = SplitModel::init(cfg.model.clone(), x.cols(), y.cols(), &mut rng)?;
    model.set_scaler(scaler);
    let graph = if cfg.needs_graph() { Some(build_graph(&x, cfg.k, cfg.metric, cfg.exec)?) } else { None };
    let kp = cfg.kernel()?;
    let mut adam = AdamState::new(AdamConfig::with_lr(cfg.lr), model.params());

    let mut report = TrainReport {
        method: cfg.method,
        epochs: Vec::with_capacity(cfg.epochs),
        steps: Vec::new(),
        graph_checksum: graph.as_ref().map(DataGraph::checksum),
        input_checksum: checksum(x.data()) ^ checksum(y.data()).rotate_left(1),
        wall_clock_secs: 0.0,
    };
    for epoch in 0..cfg.epochs {
        let plan = plan_epoch(cfg, n, graph.as_ref(), &mut rng)?;
        let (mut sum_s, mut sum_u, mut sum_t) = (0.0, 0.0, 0.0);
        for (k, step) in plan.iter().enumerate() {
            let out = run_step(cfg, &model, &kp, &x, &y, step)?;
            if !out.total.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            let log = StepLog { epoch, step: k, supervised: out.supervised, umap: out.umap, total: out.total };
            observer(&StepEvent {
                epoch,
                step: k,
                primary: &step.primary,
                partner: &step.partner,
                lambdas: &step.lambdas,
                log,
                model: &model,
                x: &x,
                y: &y,
            });
            adam.step(model.params_mut(), &out.grads)?;
            sum_s += out.supervised;
            sum_u += out.umap;
            sum_t += out.total;
            report.steps.push(log);
        }
        let steps = plan.len();
        let mean = |v: f64| if steps == 0 { 0.0 } else { v / steps as f64 };
        report.epochs.push(EpochLog { epoch, steps, supervised: mean(sum_s), umap: mean(sum_u), total: mean(sum_t) });
        log::debug!("{} epoch {epoch}: total {:.6}", cfg.method, mean(sum_t));
    }
    report.wall_clock_secs = start.elapsed().as_secs_f64();
    Ok((model, report))
}

/// Root mean squared error: `sqrt(mean_r ||pred_r - y_r||^2)`.
pub fn rmse(pred: &Tensor, y: &Tensor) -> Result<f64> {
    if pred.shape() != y.shape() {
        return Err(Error::shape("rmse", format!("{:?} vs {:?}", pred.shape(), y.shape())));
    }
    let rows = y.rows();
    let sse: f64 = pred.data().iter().zip(y.data()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((sse / rows as f64).sqrt())
}

/// RMSE in original target units on raw features.
pub fn evaluate(model: &SplitModel, x: &Tensor, y: &Tensor) -> Result<f64> {
    if x.rows() == 0 {
        return Err(Error::Empty("test set".into()));
    }
    rmse(&model.predict_raw(x)?, y)
}
