use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::graph::Metric;
use crate::mixup::LossKind;
use crate::nn::ModelSpec;
use crate::umap_loss::{fit_ab, KernelParams, DEFAULT_MIN_DIST};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Erm,
    Mixup,
    ManifoldMixup,
    UmapMixup,
    SupervisedUmap,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Erm,
        Method::Mixup,
        Method::ManifoldMixup,
        Method::UmapMixup,
        Method::SupervisedUmap,
    ];

    pub fn is_mixup(self) -> bool {
        matches!(self, Method::Mixup | Method::ManifoldMixup | Method::UmapMixup)
    }

    /// Whether the UMAP regularizer is part of the objective.
    pub fn has_umap_term(self) -> bool {
        matches!(self, Method::UmapMixup | Method::SupervisedUmap)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Erm => "erm",
            Method::Mixup => "mixup",
            Method::ManifoldMixup => "manifold_mixup",
            Method::UmapMixup => "umap_mixup",
            Method::SupervisedUmap => "supervised_umap",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.to_string() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

/// How the Mixup and Manifold Mixup baselines choose a partner for each point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairSampling {
    /// Any training point, uniformly.
    #[default]
    Uniform,
    /// A uniformly chosen neighbour in the data graph.
    Graph,
}

impl fmt::Display for PairSampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairSampling::Uniform => "uniform",
            PairSampling::Graph => "graph",
        })
    }
}

impl FromStr for PairSampling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(PairSampling::Uniform),
            "graph" => Ok(PairSampling::Graph),
            other => Err(Error::InvalidParameter(format!("unknown pair sampling `{other}` (expected uniform or graph)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub method: Method,
    /// Beta(alpha, alpha) concentration for mixing ratios.
    pub alpha: f64,
    /// Weight of the UMAP term.
    pub gamma: f64,
    pub k: usize,
    /// Negatives per positive edge.
    pub negatives: usize,
    pub min_dist: f64,
    /// Explicit kernel `(a, b)`; overrides the fit from `min_dist`.
    pub ab: Option<(f64, f64)>,
    pub metric: Metric,
    pub lr: f64,
    /// Points per batch, or positive edges per batch for the graph methods.
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub model: ModelSpec,
    pub loss: LossKind,
    pub pairs: PairSampling,
    /// Use this mixing ratio instead of drawing from Beta(alpha, alpha).
    pub fixed_lambda: Option<f64>,
    /// When false the UMAP term is left out of the objective entirely, rather
    /// than weighted by `gamma`.
    pub umap_term: bool,
    /// z-score features and targets with training-split statistics.
    pub standardize: bool,
    pub exec: Exec,
}

pub const DEFAULT_EPOCHS: usize = 400;
pub const DEFAULT_LSTM_EPOCHS: usize = 150;
pub const DEFAULT_LSTM_HIDDEN: usize = 64;

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            method: Method::UmapMixup,
            alpha: 2.0,
            gamma: 0.1,
            k: 15,
            negatives: 5,
            min_dist: DEFAULT_MIN_DIST,
            ab: None,
            metric: Metric::Euclidean,
            lr: 1e-3,
            batch_size: 32,
            epochs: DEFAULT_EPOCHS,
            seed: 0,
            model: ModelSpec::tabular(),
            loss: LossKind::SquaredError,
            pairs: PairSampling::Uniform,
            fixed_lambda: None,
            umap_term: true,
            standardize: true,
            exec: Exec::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be >= 0, got {}", self.gamma));
        }
        if self.method.is_mixup() && self.fixed_lambda.is_none() && !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be > 0, got {}", self.alpha));
        }
        if let Some(l) = self.fixed_lambda {
            if !(0.0..=1.0).contains(&l) {
                return bad(format!("fixed lambda must be in [0, 1], got {l}"));
            }
        }
        if self.k < 2 {
            return bad(format!("K must be >= 2, got {}", self.k));
        }
        if self.negatives == 0 {
            return bad("M (negatives per positive) must be >= 1".into());
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("learning rate must be > 0, got {}", self.lr));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return bad("batch_size and epochs must be >= 1".into());
        }
        self.kernel().map(|_| ())
    }

    pub fn kernel(&self) -> Result<KernelParams> {
        match self.ab {
            Some((a, b)) => KernelParams::new(a, b),
            None => fit_ab(self.min_dist),
        }
    }

    /// Whether training needs the data graph.
    pub fn needs_graph(&self) -> bool {
        self.method.has_umap_term()
            || (matches!(self.method, Method::Mixup | Method::ManifoldMixup) && self.pairs == PairSampling::Graph)
    }
}
