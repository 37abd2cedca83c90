//! Per-epoch edge sampling: each stored edge enters the positive set with
//! probability `p_ij` in a random orientation, and every positive carries `M`
//! negatives that share its source vertex and pick the other end uniformly.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::DataGraph;
use crate::umap_loss::BatchPairs;

pub const DEFAULT_NEGATIVES: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeEpoch {
    pub positives: Vec<(usize, usize)>,
    /// `negatives[k * m..(k + 1) * m]` belong to `positives[k]`.
    pub negatives: Vec<(usize, usize)>,
    pub m: usize,
}

impl EdgeEpoch {
    pub fn negatives_of(&self, k: usize) -> &[(usize, usize)] {
        &self.negatives[k * self.m..(k + 1) * self.m]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeBatch {
    /// Positions of this batch's positives within the epoch.
    pub ids: Vec<usize>,
    pub positives: Vec<(usize, usize)>,
    pub negatives: Vec<(usize, usize)>,
}

impl EdgeBatch {
    pub fn len(&self) -> usize {
        self.positives.len() + self.negatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positives.is_empty()
    }

    fn all(&self) -> impl Iterator<Item = &(usize, usize)> {
        self.positives.iter().chain(&self.negatives)
    }

    /// Pairs with global vertex indices and their stored memberships.
    pub fn pairs(&self, graph: &DataGraph) -> BatchPairs {
        BatchPairs {
            src: self.all().map(|e| e.0).collect(),
            dst: self.all().map(|e| e.1).collect(),
            p: self.all().map(|&(i, j)| graph.p(i, j)).collect(),
            n_pos: self.positives.len(),
        }
    }

    /// Distinct vertices referenced by the batch, ascending.
    pub fn vertices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.all().flat_map(|&(i, j)| [i, j]).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// `(vertices, pairs)` where pair indices point into `vertices`, so that
    /// embeddings need only be computed once per distinct vertex.
    pub fn local_pairs(&self, graph: &DataGraph) -> (Vec<usize>, BatchPairs) {
        let vertices = self.vertices();
        let local = |v: usize| vertices.binary_search(&v).expect("vertex listed");
        let mut pairs = self.pairs(graph);
        pairs.src.iter_mut().for_each(|v| *v = local(*v));
        pairs.dst.iter_mut().for_each(|v| *v = local(*v));
        (vertices, pairs)
    }
}

/// One epoch of positives and their `m` negatives each. Draw order: one coin
/// (and, if included, one orientation bit) per stored edge in edge order, then
/// the negatives.
pub fn sample_epoch(graph: &DataGraph, m: usize, rng: &mut impl Rng) -> Result<EdgeEpoch> {
    if m == 0 {
        return Err(Error::InvalidParameter("negatives per positive must be >= 1".into()));
    }
    if graph.edges().is_empty() {
        return Err(Error::Empty("graph has no edges".into()));
    }
    let mut positives = Vec::new();
    for e in graph.edges() {
        if rng.random::<f64>() < e.p {
            positives.push(if rng.random::<bool>() { (e.i, e.j) } else { (e.j, e.i) });
        }
    }
    let n = graph.n();
    let negatives = positives
        .iter()
        .flat_map(|&(i, _)| std::iter::repeat_n(i, m))
        .map(|i| (i, rng.random_range(0..n)))
        .collect();
    Ok(EdgeEpoch { positives, negatives, m })
}

/// Shuffles the positives and cuts them into batches of `batch_size`
/// (the last one may be shorter); each batch carries its own negatives.
/// An epoch with no positives yields no batches.
pub fn batches(epoch: &EdgeEpoch, batch_size: usize, rng: &mut impl Rng) -> Vec<EdgeBatch> {
    let mut order: Vec<usize> = (0..epoch.positives.len()).collect();
    order.shuffle(rng);
    order
        .chunks(batch_size.max(1))
        .map(|chunk| EdgeBatch {
            ids: chunk.to_vec(),
            positives: chunk.iter().map(|&k| epoch.positives[k]).collect(),
            negatives: chunk.iter().flat_map(|&k| epoch.negatives_of(k).iter().copied()).collect(),
        })
        .collect()
}
