use super::kernel::{q_similarity, q_tape, KernelParams, Q_EPS};
use crate::autodiff::{Tensor, Var};
use crate::error::{Error, Result};
use crate::graph::DataGraph;

/// Largest point count accepted by the all-pairs cross-entropy.
pub const FULL_LIMIT: usize = 2000;

/// `x log(x / y)` with the `0 log 0 = 0` convention.
fn xlogx_over(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (x / y).ln()
    }
}

/// Fuzzy cross-entropy of a single pair: `p log(p/q) + (1-p) log((1-p)/(1-q))`,
/// `q` clamped to `[eps, 1 - eps]`.
pub fn pair_cross_entropy(p: f64, q: f64) -> f64 {
    let q = q.clamp(Q_EPS, 1.0 - Q_EPS);
    xlogx_over(p, q) + xlogx_over(1.0 - p, 1.0 - q)
}

/// Negative-edge membership used inside logarithms. A sampled negative that
/// lands on a `p = 1` edge would make `log(1 - p)` infinite; it is floored at
/// the same epsilon as `q`.
pub fn negative_complement(p: f64) -> f64 {
    (1.0 - p).max(Q_EPS)
}

/// Pairs of one batch: the first `n_pos` entries are positive edges, the rest
/// negatives, each with its stored membership `p` (0 when the pair has no edge).
#[derive(Debug, Clone, PartialEq)]
pub struct BatchPairs {
    pub src: Vec<usize>,
    pub dst: Vec<usize>,
    pub p: Vec<f64>,
    pub n_pos: usize,
}

impl BatchPairs {
    pub fn len(&self) -> usize {
        self.src.len()
    }

    pub fn is_empty(&self) -> bool {
        self.src.is_empty()
    }

    fn validate(&self) -> Result<()> {
        if self.src.is_empty() {
            return Err(Error::Empty("batch has no edges".into()));
        }
        if self.dst.len() != self.src.len() || self.p.len() != self.src.len() || self.n_pos > self.src.len() {
            return Err(Error::shape("batch", "src/dst/p lengths disagree"));
        }
        Ok(())
    }

    /// Sum of the p-only terms: `log p` for positives, `log(1 - p)` for negatives.
    fn constant(&self) -> f64 {
        self.p[..self.n_pos].iter().map(|p| p.ln()).sum::<f64>()
            + self.p[self.n_pos..].iter().map(|&p| negative_complement(p).ln()).sum::<f64>()
    }
}

/// Batch estimator
/// `(1/|E_b|) [ sum_pos log(p/q) + sum_neg log((1-p)/(1-q)) ]`
/// evaluated from embedding rows indexed by `src`/`dst`.
pub fn cross_entropy_batch(pairs: &BatchPairs, z: &Tensor, kp: &KernelParams) -> Result<f64> {
    pairs.validate()?;
    let mut total = pairs.constant();
    for (e, (&i, &j)) in pairs.src.iter().zip(&pairs.dst).enumerate() {
        let q = q_similarity(z.row(i), z.row(j), kp)?;
        total -= if e < pairs.n_pos { q.ln() } else { (1.0 - q).ln() };
    }
    Ok(total / pairs.len() as f64)
}

/// Differentiable form of [`cross_entropy_batch`]; `z` holds one embedding row
/// per vertex referenced by the pair indices.
pub fn cross_entropy_batch_tape<'t>(pairs: &BatchPairs, z: Var<'t>, kp: &KernelParams) -> Result<Var<'t>> {
    pairs.validate()?;
    let tape = z.tape();
    let q = q_tape(z.gather_rows(&pairs.src)?, z.gather_rows(&pairs.dst)?, kp)?;
    let e = pairs.len();
    let pos_mask: Vec<f64> = (0..e).map(|k| if k < pairs.n_pos { 1.0 } else { 0.0 }).collect();
    let neg_mask: Vec<f64> = pos_mask.iter().map(|m| 1.0 - m).collect();
    let pos = q.ln().mul(tape.constant(Tensor::from_parts(vec![e, 1], pos_mask)))?;
    let neg = q.rsub_scalar(1.0).ln().mul(tape.constant(Tensor::from_parts(vec![e, 1], neg_mask)))?;
    Ok(pos.add(neg)?.sum().scale(-1.0 / e as f64).add_scalar(pairs.constant() / e as f64))
}

fn check_full(graph: &DataGraph, n: usize) -> Result<()> {
    if n > FULL_LIMIT {
        return Err(Error::TooLarge { what: "full cross-entropy point count", n, limit: FULL_LIMIT });
    }
    if graph.n() != n {
        return Err(Error::shape("cross_entropy_full", format!("graph has {} points, {n} embeddings", graph.n())));
    }
    Ok(())
}

/// Cross-entropy between `P` and `Q` summed over all ordered pairs `i != j`.
pub fn cross_entropy_full(graph: &DataGraph, z: &Tensor, kp: &KernelParams) -> Result<f64> {
    let n = z.rows();
    check_full(graph, n)?;
    let mut total = 0.0;
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            total += pair_cross_entropy(graph.p(i, j), q_similarity(z.row(i), z.row(j), kp)?);
        }
    }
    Ok(total)
}

/// Differentiable form of [`cross_entropy_full`].
pub fn cross_entropy_full_tape<'t>(graph: &DataGraph, z: Var<'t>, kp: &KernelParams) -> Result<Var<'t>> {
    let n = z.shape()[0];
    check_full(graph, n)?;
    if n < 2 {
        return Err(Error::Empty("cross-entropy needs at least two points".into()));
    }
    let tape = z.tape();
    let (mut src, mut dst, mut p) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            src.push(i);
            dst.push(j);
            p.push(graph.p(i, j));
        }
    }
    let constant: f64 = p.iter().map(|&v| xlogx_over(v, 1.0) + xlogx_over(1.0 - v, 1.0)).sum();
    let m = p.len();
    let w_pos = tape.constant(Tensor::from_parts(vec![m, 1], p.clone()));
    let w_neg = tape.constant(Tensor::from_parts(vec![m, 1], p.iter().map(|v| 1.0 - v).collect()));
    let q = q_tape(z.gather_rows(&src)?, z.gather_rows(&dst)?, kp)?;
    let cross = q.ln().mul(w_pos)?.add(q.rsub_scalar(1.0).ln().mul(w_neg)?)?;
    Ok(cross.sum().neg().add_scalar(constant))
}
