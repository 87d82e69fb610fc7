//! Phase unwrapping by fitting an untrained encoder-decoder to the wrapped
//! phase gradients with iteratively reweighted residual norms.

pub mod background;
pub mod config;
pub mod error;
pub mod generator;
pub mod layers;
pub mod run;

pub use background::{local_std, remove_background, segment_threshold};
pub use config::{GeneratorConfig, OffsetMode, TrainConfig};
pub use error::{PudipError, Result};
pub use generator::{build_generator, reflect_pad, sample_input, Generator};
pub use layers::{pudip_loss, OffsetLayer, WeightedResidualLoss};
pub use run::{unwrap_pudip, RunReport};
