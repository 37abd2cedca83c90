//! Run settings read from a flat `key = value` file with `[section]` headers,
//! then overridden by `section.key=value` pairs from the command line.
//!
//! ```text
//! # comment
//! [train]
//! method = umap_mixup
//! gamma = 0.1
//! [graph]
//! k = 15
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::data::SeriesKind;
use crate::error::{Error, Result};
use crate::graph::Metric;
use crate::nn::{Activation, EmbedSpec, HeadSpec, ModelSpec};
use crate::trainer::{BenchmarkOptions, Method, PairSampling, SeriesOptions, TrainConfig, DEFAULT_EPOCHS, DEFAULT_LSTM_EPOCHS, DEFAULT_LSTM_HIDDEN};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Mlp,
    Lstm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub train: TrainConfig,
    /// `None` picks 400 for MLPs and 150 for LSTMs.
    pub epochs: Option<usize>,
    pub model_kind: Option<ModelKind>,
    pub widths: Vec<usize>,
    pub activation: Activation,
    pub head_hidden: Vec<usize>,
    pub head_activation: Activation,
    pub lstm_hidden: usize,
    /// Directory holding the built-in dataset CSVs.
    pub data_dir: PathBuf,
    /// Target column for CSV paths that are not built-in datasets.
    pub target: Option<String>,
    pub folds: usize,
    pub test_fraction: f64,
    pub methods: Vec<Method>,
    pub parallel_folds: usize,
    pub window: usize,
    pub series_test_fraction: f64,
    pub series_length: usize,
    pub series_column: String,
    pub series_seeds: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            epochs: None,
            model_kind: None,
            widths: vec![100, 50],
            activation: Activation::Relu,
            head_hidden: Vec::new(),
            head_activation: Activation::Relu,
            lstm_hidden: DEFAULT_LSTM_HIDDEN,
            data_dir: PathBuf::from("data"),
            target: None,
            folds: 20,
            test_fraction: 0.1,
            methods: vec![Method::Erm, Method::Mixup, Method::ManifoldMixup, Method::UmapMixup],
            parallel_folds: 1,
            window: 60,
            series_test_fraction: 0.2,
            series_length: 1000,
            series_column: "close".into(),
            series_seeds: 5,
        }
    }
}

/// Every accepted key with its default, as listed in `--help`.
pub const KEYS: &[(&str, &str)] = &[
    ("train.method", "umap_mixup"),
    ("train.alpha", "2"),
    ("train.gamma", "0.1"),
    ("train.lr", "0.001"),
    ("train.batch_size", "32"),
    ("train.epochs", "400 (mlp) / 150 (lstm)"),
    ("train.seed", "0"),
    ("train.loss", "squared_error"),
    ("train.pairs", "uniform"),
    ("train.lambda", "drawn from Beta(alpha, alpha)"),
    ("train.standardize", "true"),
    ("graph.k", "15"),
    ("graph.metric", "euclidean"),
    ("sampler.negatives", "5"),
    ("umap.min_dist", "0.1"),
    ("umap.a", "fitted from min_dist"),
    ("umap.b", "fitted from min_dist"),
    ("model.kind", "mlp (lstm for series)"),
    ("model.widths", "100,50"),
    ("model.activation", "relu"),
    ("model.head_hidden", "none"),
    ("model.head_activation", "relu"),
    ("model.lstm_hidden", "64"),
    ("data.dir", "data"),
    ("data.target", "built-in datasets know their target"),
    ("benchmark.folds", "20"),
    ("benchmark.test_fraction", "0.1"),
    ("benchmark.methods", "erm,mixup,manifold_mixup,umap_mixup"),
    ("benchmark.parallel_folds", "1"),
    ("series.window", "60"),
    ("series.test_fraction", "0.2"),
    ("series.length", "1000"),
    ("series.column", "close"),
    ("series.seeds", "5"),
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    if value.is_empty() || value == "none" || value == "-" {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| parse(key, v.trim())).collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("`{key}`: expected true or false, got `{value}`"))),
    }
}

impl Settings {
    /// Sets `section.key`; unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let t = &mut self.train;
        match key {
            "train.method" => t.method = value.parse()?,
            "train.alpha" => t.alpha = parse(key, value)?,
            "train.gamma" => t.gamma = parse(key, value)?,
            "train.lr" => t.lr = parse(key, value)?,
            "train.batch_size" => t.batch_size = parse(key, value)?,
            "train.epochs" => self.epochs = Some(parse(key, value)?),
            "train.seed" => t.seed = parse(key, value)?,
            "train.loss" => t.loss = value.parse()?,
            "train.pairs" => t.pairs = value.parse::<PairSampling>()?,
            "train.lambda" => t.fixed_lambda = Some(parse(key, value)?),
            "train.standardize" => t.standardize = parse_bool(key, value)?,
            "graph.k" => t.k = parse(key, value)?,
            "graph.metric" => t.metric = value.parse::<Metric>()?,
            "sampler.negatives" => t.negatives = parse(key, value)?,
            "umap.min_dist" => t.min_dist = parse(key, value)?,
            "umap.a" => t.ab = Some((parse(key, value)?, t.ab.map_or(f64::NAN, |ab| ab.1))),
            "umap.b" => t.ab = Some((t.ab.map_or(f64::NAN, |ab| ab.0), parse(key, value)?)),
            "model.kind" => {
                self.model_kind = Some(match value {
                    "mlp" => ModelKind::Mlp,
                    "lstm" => ModelKind::Lstm,
                    _ => return Err(Error::Config(format!("`{key}`: expected mlp or lstm, got `{value}`"))),
                })
            }
            "model.widths" => self.widths = parse_list(key, value)?,
            "model.activation" => self.activation = value.parse()?,
            "model.head_hidden" => self.head_hidden = parse_list(key, value)?,
            "model.head_activation" => self.head_activation = value.parse()?,
            "model.lstm_hidden" => self.lstm_hidden = parse(key, value)?,
            "data.dir" => self.data_dir = PathBuf::from(value),
            "data.target" => self.target = Some(value.to_string()),
            "benchmark.folds" => self.folds = parse(key, value)?,
            "benchmark.test_fraction" => self.test_fraction = parse(key, value)?,
            "benchmark.methods" => self.methods = parse_list(key, value)?,
            "benchmark.parallel_folds" => self.parallel_folds = parse(key, value)?,
            "series.window" => self.window = parse(key, value)?,
            "series.test_fraction" => self.series_test_fraction = parse(key, value)?,
            "series.length" => self.series_length = parse(key, value)?,
            "series.column" => self.series_column = value.to_string(),
            "series.seeds" => self.series_seeds = parse(key, value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a config file's contents.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        let mut section = String::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("{origin}:{}: expected `key = value`", no + 1)))?;
            if section.is_empty() {
                return Err(Error::Config(format!("{origin}:{}: key outside any [section]", no + 1)));
            }
            self.set(&format!("{section}.{}", k.trim()), v)
                .map_err(|e| Error::Config(format!("{origin}:{}: {e}", no + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text, &path.display().to_string())
    }

    /// Applies `section.key=value` overrides.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<()> {
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{o}` is not key=value")))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    /// Defaults, then the optional file, then overrides.
    pub fn load(file: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut s = Settings::default();
        if let Some(f) = file {
            s.apply_file(f)?;
        }
        s.apply_overrides(overrides)?;
        if let Some((a, b)) = s.train.ab {
            if a.is_nan() || b.is_nan() {
                return Err(Error::Config("umap.a and umap.b must be given together".into()));
            }
        }
        Ok(s)
    }

    /// Resolved training configuration for a tabular (`series = false`) or
    /// price-window model.
    pub fn train_config(&self, series: bool) -> TrainConfig {
        let kind = self.model_kind.unwrap_or(if series { ModelKind::Lstm } else { ModelKind::Mlp });
        let embed = match kind {
            ModelKind::Mlp => EmbedSpec::Mlp { widths: self.widths.clone(), activation: self.activation },
            ModelKind::Lstm => EmbedSpec::Lstm { input_size: 1, hidden: self.lstm_hidden },
        };
        let default_epochs = if kind == ModelKind::Lstm { DEFAULT_LSTM_EPOCHS } else { DEFAULT_EPOCHS };
        TrainConfig {
            model: ModelSpec { embed, head: HeadSpec { hidden: self.head_hidden.clone(), activation: self.head_activation } },
            epochs: self.epochs.unwrap_or(default_epochs),
            ..self.train.clone()
        }
    }

    pub fn benchmark_options(&self) -> BenchmarkOptions {
        BenchmarkOptions {
            folds: self.folds,
            test_fraction: self.test_fraction,
            seed: self.train.seed,
            parallel_folds: self.parallel_folds,
        }
    }

    pub fn series_options(&self) -> SeriesOptions {
        SeriesOptions {
            window: self.window,
            test_fraction: self.series_test_fraction,
            seeds: (0..self.series_seeds as u64).map(|s| self.train.seed.wrapping_add(s)).collect(),
            parallel: self.parallel_folds,
        }
    }
}

/// Names that select a synthetic price series instead of a CSV.
pub fn synthetic_kind(name: &str) -> Option<SeriesKind> {
    name.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_precedence() {
        let mut s = Settings::default();
        s.apply_text("# c\n[train]\ngamma = 0.5  # inline\nmethod=erm\n[graph]\nk = 7\n", "f").unwrap();
        assert_eq!((s.train.gamma, s.train.method, s.train.k), (0.5, Method::Erm, 7));
        s.apply_overrides(&["train.gamma=0.25".into()]).unwrap();
        assert_eq!(s.train.gamma, 0.25);
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut s = Settings::default();
        let err = s.apply_text("[train]\ngamm = 1\n", "f").unwrap_err();
        assert!(err.to_string().contains("gamm") && err.is_usage());
        assert!(s.apply_text("gamma = 1\n", "f").is_err());
        assert!(s.apply_overrides(&["train.gamma".into()]).is_err());
    }

    #[test]
    fn every_listed_key_is_accepted() {
        let samples = [
            ("train.method", "erm"),
            ("train.loss", "squared_error"),
            ("train.pairs", "graph"),
            ("train.standardize", "false"),
            ("graph.metric", "manhattan"),
            ("model.kind", "lstm"),
            ("model.widths", "8,4"),
            ("model.activation", "tanh"),
            ("model.head_hidden", "none"),
            ("model.head_activation", "relu"),
            ("data.dir", "x"),
            ("data.target", "t"),
            ("benchmark.methods", "erm,umap_mixup"),
            ("series.column", "close"),
        ];
        for (key, _) in KEYS {
            let mut s = Settings::default();
            let v = samples.iter().find(|(k, _)| k == key).map_or("1", |(_, v)| v);
            s.set(key, v).unwrap_or_else(|e| panic!("{key}: {e}"));
        }
    }

    #[test]
    fn kernel_pair_must_be_complete() {
        assert!(Settings::load(None, &["umap.a=1".into()]).is_err());
        let s = Settings::load(None, &["umap.a=1".into(), "umap.b=2".into()]).unwrap();
        assert_eq!(s.train.ab, Some((1.0, 2.0)));
    }

    #[test]
    fn series_defaults_to_lstm() {
        let s = Settings::default();
        let c = s.train_config(true);
        assert!(matches!(c.model.embed, EmbedSpec::Lstm { hidden: 64, .. }));
        assert_eq!(c.epochs, 150);
        assert_eq!(s.train_config(false).epochs, 400);
    }
}
