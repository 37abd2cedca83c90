//! Network building blocks: dense and LSTM embedding networks, the split
//! embedding/head model, Adam, and the Beta mixing-ratio sampler.

mod activation;
mod adam;
mod beta;
pub mod io;
mod lstm;
mod model;

pub use activation::Activation;
pub use adam::{AdamConfig, AdamState};
pub use beta::sample_lambda;
pub use lstm::lstm_state;
pub use model::{Bound, EmbedSpec, HeadSpec, ModelSpec, Param, ParamGroup, SplitModel};
