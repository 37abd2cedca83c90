use std::fmt;
use std::str::FromStr;

use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::exec::Exec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Euclidean,
    Manhattan,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Euclidean => "euclidean",
            Metric::Manhattan => "manhattan",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "manhattan" => Ok(Metric::Manhattan),
            other => Err(Error::InvalidParameter(format!(
                "unknown metric `{other}` (expected euclidean or manhattan)"
            ))),
        }
    }
}

/// The `k` nearest neighbours of every point, nearest first.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTable {
    pub k: usize,
    pub indices: Vec<Vec<usize>>,
    pub distances: Vec<Vec<f64>>,
}

impl NeighborTable {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

pub(crate) fn check_k(n: usize, k: usize) -> Result<()> {
    if k >= n {
        return Err(Error::InvalidParameter(format!("K must be < N (K={k}, N={n})")));
    }
    if k < 2 {
        return Err(Error::InvalidParameter(format!("K must be >= 2, got {k}")));
    }
    Ok(())
}

/// Exact brute-force k-NN over the rows of `x`. Ties are broken by the lower index.
pub fn knn(x: &Tensor, k: usize, metric: Metric, exec: Exec) -> Result<NeighborTable> {
    let n = x.rows();
    check_k(n, k)?;
    if let Some(pos) = x.data().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("feature row {}", pos / x.cols())));
    }
    let rows: Vec<(Vec<usize>, Vec<f64>)> = exec.map_range(n, |i| {
        let xi = x.row(i);
        let mut cand: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (metric.distance(xi, x.row(j)), j))
            .collect();
        let by_dist = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        cand.select_nth_unstable_by(k - 1, by_dist);
        cand.truncate(k);
        cand.sort_unstable_by(by_dist);
        cand.into_iter().map(|(d, j)| (j, d)).unzip()
    });
    let (indices, distances) = rows.into_iter().unzip();
    Ok(NeighborTable { k, indices, distances })
}
