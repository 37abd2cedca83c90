use super::knn::{knn, Metric, NeighborTable};
use super::scale::{directional_probability, fit_local_scale, LocalScale};
use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::exec::Exec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub p: f64,
}

/// Probabilistic OR of the two directional memberships. Written as a product
/// of complements so that either side being 1 gives exactly 1.
pub fn fuzzy_union(a: f64, b: f64) -> f64 {
    1.0 - (1.0 - a) * (1.0 - b)
}

/// Directional memberships `p_{j|i}` for each point's neighbour list.
pub fn directional_table(table: &NeighborTable, scales: &[LocalScale]) -> Vec<Vec<(usize, f64)>> {
    table
        .indices
        .iter()
        .zip(&table.distances)
        .zip(scales)
        .map(|((idx, dist), s)| {
            idx.iter()
                .zip(dist)
                .map(|(&j, &d)| (j, directional_probability(d, s.rho, s.sigma)))
                .collect()
        })
        .collect()
}

/// Combines directional memberships into one undirected edge per pair
/// (`i < j`), dropping zero-membership pairs. Output is sorted by `(i, j)`.
pub fn symmetrize(directional: &[Vec<(usize, f64)>]) -> Vec<Edge> {
    let mut half: Vec<(usize, usize, f64)> = directional
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().map(move |&(j, p)| (i.min(j), i.max(j), p)))
        .collect();
    half.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut edges = Vec::with_capacity(half.len());
    let mut k = 0;
    while k < half.len() {
        let (i, j, a) = half[k];
        let (p, step) = match half.get(k + 1) {
            Some(&(i2, j2, b)) if (i2, j2) == (i, j) => (fuzzy_union(a, b), 2),
            _ => (a, 1),
        };
        if p > 0.0 {
            edges.push(Edge { i, j, p });
        }
        k += step;
    }
    edges
}

/// Sparse symmetric fuzzy graph over `n` points with each point's local scale.
#[derive(Debug, Clone, PartialEq)]
pub struct DataGraph {
    n: usize,
    k: usize,
    metric: Metric,
    edges: Vec<Edge>,
    scales: Vec<LocalScale>,
    // adjacency in both directions: neighbours of i are adj[offsets[i]..offsets[i+1]], sorted
    offsets: Vec<usize>,
    adj: Vec<(usize, f64)>,
}

impl DataGraph {
    pub fn from_edges(n: usize, k: usize, metric: Metric, mut edges: Vec<Edge>, scales: Vec<LocalScale>) -> Result<Self> {
        if scales.len() != n {
            return Err(Error::shape("graph", format!("{} local scales for {n} points", scales.len())));
        }
        for e in &edges {
            if e.i >= e.j || e.j >= n {
                return Err(Error::InvalidParameter(format!("edge ({}, {}) invalid for N={n}", e.i, e.j)));
            }
            if !(e.p > 0.0 && e.p <= 1.0) {
                return Err(Error::InvalidParameter(format!("edge ({}, {}) has p={} outside (0, 1]", e.i, e.j, e.p)));
            }
        }
        edges.sort_by(|a, b| (a.i, a.j).cmp(&(b.i, b.j)));
        if edges.windows(2).any(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return Err(Error::InvalidParameter("duplicate edge".into()));
        }
        let mut degree = vec![0usize; n + 1];
        for e in &edges {
            degree[e.i + 1] += 1;
            degree[e.j + 1] += 1;
        }
        for v in 1..=n {
            degree[v] += degree[v - 1];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let mut adj = vec![(0, 0.0); 2 * edges.len()];
        for e in &edges {
            adj[fill[e.i]] = (e.j, e.p);
            fill[e.i] += 1;
            adj[fill[e.j]] = (e.i, e.p);
            fill[e.j] += 1;
        }
        for v in 0..n {
            adj[offsets[v]..offsets[v + 1]].sort_by_key(|&(j, _)| j);
        }
        Ok(Self { n, k, metric, edges, scales, offsets, adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    /// Undirected edges with `i < j`, sorted.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn scales(&self) -> &[LocalScale] {
        &self.scales
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[self.offsets[i]..self.offsets[i + 1]]
    }

    /// `p_ij`, zero for non-edges and for `i == j`.
    pub fn p(&self, i: usize, j: usize) -> f64 {
        let row = self.neighbors(i);
        match row.binary_search_by_key(&j, |&(v, _)| v) {
            Ok(pos) => row[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn mean_p(&self) -> f64 {
        if self.edges.is_empty() {
            0.0
        } else {
            self.edges.iter().map(|e| e.p).sum::<f64>() / self.edges.len() as f64
        }
    }

    /// FNV-1a over the graph contents, for checking that runs share a graph.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |v: u64| {
            for b in v.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        eat(self.n as u64);
        for e in &self.edges {
            eat(e.i as u64);
            eat(e.j as u64);
            eat(e.p.to_bits());
        }
        h
    }
}

/// k-NN, local scales, directional memberships and symmetrization.
pub fn build_graph(x: &Tensor, k: usize, metric: Metric, exec: Exec) -> Result<DataGraph> {
    let table = knn(x, k, metric, exec)?;
    let scales = exec
        .map_slice(&table.distances, |d| fit_local_scale(d, k))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let edges = symmetrize(&directional_table(&table, &scales));
    DataGraph::from_edges(x.rows(), k, metric, edges, scales)
}
