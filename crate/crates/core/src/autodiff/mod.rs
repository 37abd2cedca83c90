//! Tape-based reverse-mode automatic differentiation over dense 2-D tensors.
//!
//! Every forward pass records onto a fresh [`Tape`]. Leaves created with
//! [`Tape::param`] are trainable; [`Tape::backward`] returns their gradients.
//! Binary elementwise ops broadcast size-1 rows/columns (no rank > 2).

pub mod gradcheck;
mod tape;
mod tensor;

pub use tape::{Gradients, Tape, Var};
pub use tensor::Tensor;
