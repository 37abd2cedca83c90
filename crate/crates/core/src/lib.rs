//! Mixup regularization performed in an embedding layer that is trained jointly
//! with a parametric-UMAP topological loss, plus the ERM, input Mixup and
//! Manifold Mixup baselines it is compared against.

pub mod autodiff;
pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod exec;
pub mod graph;
pub mod mixup;
pub mod nn;
pub mod sampler;
pub mod trainer;
pub mod umap_loss;

pub use error::{Error, Result};
