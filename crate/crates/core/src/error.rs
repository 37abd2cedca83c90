use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {detail}")]
    Shape { op: &'static str, detail: String },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("backward: {0}")]
    Backward(String),

    #[error("non-finite gradient for parameter `{param}` in group {group}")]
    NonFiniteGradient { group: String, param: String },

    #[error("training diverged at epoch {epoch}: non-finite loss")]
    Diverged { epoch: usize },

    #[error("unknown loss `{0}` (expected squared_error)")]
    UnknownLoss(String),

    #[error("unknown method `{0}` (expected erm, mixup, manifold_mixup, umap_mixup or supervised_umap)")]
    UnknownMethod(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("{what} too large: {n} > {limit}")]
    TooLarge {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    #[error("dataset not found: expected a CSV at {}", .0.display())]
    DatasetMissing(PathBuf),

    #[error("{}: row {row}: {msg}", .path.display())]
    Parse {
        path: PathBuf,
        row: usize,
        msg: String,
    },

    #[error("{}: {msg}", .path.display())]
    Format { path: PathBuf, msg: String },

    #[error("config: {0}")]
    Config(String),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn shape(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Shape {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input (flags, config values, hyperparameters),
    /// as opposed to failures that happen while doing the work.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::UnknownLoss(_)
                | Error::UnknownMethod(_)
                | Error::Config(_)
        )
    }
}
