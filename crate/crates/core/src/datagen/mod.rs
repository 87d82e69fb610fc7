//! Synthetic ground-truth phase maps and their wrapped observations.
//!
//! Every generator is a pure function of its spec and seed.

pub mod ellipse;
pub mod phantom;
pub mod phasenet;
pub mod speckle;
pub mod surface;

pub use ellipse::{gen_sample_b, gen_sample_c, EllipseSpec};
pub use phantom::{straight_ray_phase, Ellipsoid, PhantomSpec};
pub use phasenet::{gen_phasenet_dataset, PhaseNetDataset, PhaseNetSample, MAX_WRAP_COUNT};
pub use speckle::{add_speckle, snr_db};
pub use surface::{
    bicubic_sample, bicubic_upsample, gen_sample_d, random_surface, RandomSurfaceSpec, MATRIX_SIZES,
    SurfaceDistribution,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic generator for `(seed, stream)`.
pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
