//! Training tuples for wrap-count classification networks.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use rand::Rng;

use super::rng_for;
use super::surface::{disk_mask, random_surface, RandomSurfaceSpec, SurfaceDistribution, MATRIX_SIZES};
use crate::grid::Grid2D;
use crate::phase::wrap_grid;

/// Largest wrap count; the classes are `0..=MAX_WRAP_COUNT`.
pub const MAX_WRAP_COUNT: u32 = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseNetSample {
    pub index: usize,
    /// Seed from which this tuple alone can be regenerated.
    pub seed: u64,
    pub spec: RandomSurfaceSpec,
    pub truth: Grid2D,
    pub wrapped: Grid2D,
    /// Integer-valued wrap counts `(truth - wrapped) / 2π`.
    pub wrap_count: Grid2D,
}

impl PhaseNetSample {
    /// Manifest line: index, seed, scale, matrix size, distribution, then
    /// the given file paths, tab separated.
    pub fn manifest_line(&self, paths: &[&str]) -> String {
        let dist = match self.spec.distribution {
            SurfaceDistribution::Uniform01 => "uniform",
            SurfaceDistribution::GaussianShifted => "gaussian",
        };
        let mut line = format!(
            "{}\t{}\t{:?}\t{}\t{}",
            self.index, self.seed, self.spec.scale, self.spec.matrix_size, dist
        );
        for p in paths {
            let _ = write!(line, "\t{p}");
        }
        line
    }
}

/// Iterator over dataset tuples; see [`gen_phasenet_dataset`].
#[derive(Clone, Debug)]
pub struct PhaseNetDataset {
    count: usize,
    seed: u64,
    target_size: usize,
    next: usize,
}

/// `count` tuples on 256x256 frames.
///
/// Tuple `k` alternates the seed-matrix distribution (uniform for even
/// `k`), draws the matrix size from the odd sizes 3 to 11 and the scale from
/// `U(3π, 12π)`. Surfaces whose peak exceeds `40π` are rescaled to `40π`
/// so that wrap counts stay within `0..=20`.
pub fn gen_phasenet_dataset(count: usize, seed: u64) -> PhaseNetDataset {
    PhaseNetDataset {
        count,
        seed,
        target_size: 256,
        next: 0,
    }
}

impl PhaseNetDataset {
    pub fn with_target_size(mut self, target_size: usize) -> Self {
        self.target_size = target_size;
        self
    }

    /// Per-tuple seed, independent of iteration order.
    pub fn tuple_seed(&self, index: usize) -> u64 {
        let mut z = self.seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Builds tuple `index` directly.
    pub fn sample(&self, index: usize) -> PhaseNetSample {
        let seed = self.tuple_seed(index);
        let mut rng = rng_for(seed, 2);
        let distribution = if index.is_multiple_of(2) {
            SurfaceDistribution::Uniform01
        } else {
            SurfaceDistribution::GaussianShifted
        };
        let matrix_size = MATRIX_SIZES[rng.random_range(0..MATRIX_SIZES.len())];
        let mut spec = RandomSurfaceSpec {
            matrix_size,
            distribution,
            scale: rng.random_range(3.0 * PI..12.0 * PI),
            target_size: self.target_size,
        };
        let mut truth = disk_mask(
            &random_surface(&spec, seed).expect("sizes and scale drawn within valid ranges"),
        );
        let cap = TAU * MAX_WRAP_COUNT as f64;
        let peak = truth.max();
        if peak > cap {
            truth = truth.map(|v| (v * (cap / peak)).min(cap));
            spec.scale *= cap / peak;
        }
        let wrapped = wrap_grid(&truth).expect("finite surface");
        let wrap_count = truth
            .zip_map(&wrapped, |t, w| ((t - w) / TAU).round())
            .expect("same shape");
        PhaseNetSample {
            index,
            seed,
            spec,
            truth,
            wrapped,
            wrap_count,
        }
    }
}

impl Iterator for PhaseNetDataset {
    type Item = PhaseNetSample;

    fn next(&mut self) -> Option<PhaseNetSample> {
        (self.next < self.count).then(|| {
            self.next += 1;
            self.sample(self.next - 1)
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.count - self.next;
        (left, Some(left))
    }
}

impl ExactSizeIterator for PhaseNetDataset {}
