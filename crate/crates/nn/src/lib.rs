//! Minimal reverse-mode autodiff for single-image convolutional networks.
//!
//! Activations are `channels x height x width` tensors (batch size one).
//! Each forward pass records onto a fresh [`Graph`]; parameters live in a
//! [`ParamStore`] and are bound into the graph per pass.

mod conv;
mod norm;
mod resample;

pub mod checkpoint;
pub mod error;
pub mod graph;
pub mod layers;
pub mod optim;
pub mod tensor;

pub use checkpoint::{decode_params, encode_params, load_params, save_params};
pub use error::{NnError, Result};
pub use graph::{Function, Graph, Var};
pub use layers::{BatchNorm2d, Bound, Conv2d, PRelu, ParamId, ParamStore, BN_EPS};
pub use optim::Adam;
pub use tensor::Tensor;
