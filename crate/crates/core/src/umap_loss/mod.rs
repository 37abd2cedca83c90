//! Embedding-side similarity `q`, the `(a, b)` curve fit, and the fuzzy
//! cross-entropy between the data graph and the embedding graph.

mod entropy;
mod kernel;

pub use entropy::{
    cross_entropy_batch, cross_entropy_batch_tape, cross_entropy_full, cross_entropy_full_tape,
    negative_complement, pair_cross_entropy, BatchPairs, FULL_LIMIT,
};
pub use kernel::{
    fit_ab, fit_grid, q_similarity, q_tape, target_curve, KernelParams, DEFAULT_MIN_DIST, FIT_GRID_MAX,
    FIT_GRID_POINTS, Q_EPS,
};
