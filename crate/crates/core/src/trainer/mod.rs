//! Per-method objectives, the training loop, RMSE evaluation and multi-fold
//! benchmarks.
//!
//! | method            | batch unit        | supervised term                    | UMAP term |
//! |-------------------|-------------------|------------------------------------|-----------|
//! | `erm`             | points            | squared error                      | -         |
//! | `mixup`           | points            | mixed inputs, mixed targets        | -         |
//! | `manifold_mixup`  | points            | mixed embeddings, mixed targets    | -         |
//! | `supervised_umap` | positive edges    | squared error on edge sources      | γ · batch |
//! | `umap_mixup`      | positive edges    | mixed embeddings of edge endpoints | γ · batch |

mod bench;
mod config;
mod train;

pub use bench::{
    fold_seed, folds_csv, run_benchmark, run_series_benchmark, summary_csv, summary_table, BenchmarkOptions,
    BenchmarkResult, SeriesOptions,
};
pub use config::{Method, PairSampling, TrainConfig, DEFAULT_EPOCHS, DEFAULT_LSTM_EPOCHS, DEFAULT_LSTM_HIDDEN};
pub use train::{evaluate, rmse, train, train_observed, EpochLog, StepEvent, StepLog, TrainReport};
