//! Random smooth surfaces built by bicubic upsampling of small random matrices.

use rand::Rng;
use rand_distr::StandardNormal;

use super::rng_for;
use crate::error::{Error, Result};
use crate::grid::Grid2D;
use crate::phase::wrap_grid;

/// Cubic convolution weights (Catmull-Rom, `a = -0.5`) for taps at
/// offsets `-1, 0, 1, 2` from `floor(x)`, given `t = x - floor(x)`.
fn cubic_weights(t: f64) -> [f64; 4] {
    const A: f64 = -0.5;
    let near = |s: f64| ((A + 2.0) * s - (A + 3.0)) * s * s + 1.0;
    let far = |s: f64| ((A * s - 5.0 * A) * s + 8.0 * A) * s - 4.0 * A;
    [far(1.0 + t), near(t), near(1.0 - t), far(2.0 - t)]
}

fn clamp_index(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// Bicubic interpolation of `m` at continuous source coordinates
/// `(y, x)`, where integer coordinates are pixel centres. Taps outside the
/// grid are clamped to the nearest edge pixel.
pub fn bicubic_sample(m: &Grid2D, y: f64, x: f64) -> f64 {
    let (h, w) = m.shape();
    let (fy, fx) = (y.floor(), x.floor());
    let wy = cubic_weights(y - fy);
    let wx = cubic_weights(x - fx);
    let (iy, ix) = (fy as isize, fx as isize);
    let mut acc = 0.0;
    for (a, &cy) in wy.iter().enumerate() {
        let r = clamp_index(iy + a as isize - 1, h);
        let row = m.row(r);
        let mut line = 0.0;
        for (b, &cx) in wx.iter().enumerate() {
            line += cx * row[clamp_index(ix + b as isize - 1, w)];
        }
        acc += cy * line;
    }
    acc
}

/// Resamples `m` to `height x width` with half-pixel aligned centres.
pub fn bicubic_upsample(m: &Grid2D, height: usize, width: usize) -> Result<Grid2D> {
    if height == 0 || width == 0 {
        return Err(Error::EmptyGrid { height, width });
    }
    let sy = m.height() as f64 / height as f64;
    let sx = m.width() as f64 / width as f64;
    Ok(Grid2D::from_fn(height, width, |i, j| {
        bicubic_sample(m, (i as f64 + 0.5) * sy - 0.5, (j as f64 + 0.5) * sx - 0.5)
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SurfaceDistribution {
    /// Entries drawn from `U(0, 1)`.
    Uniform01,
    /// Entries drawn from `N(0, 1)`, shifted so that the minimum is zero.
    GaussianShifted,
}

pub const MATRIX_SIZES: [usize; 5] = [3, 5, 7, 9, 11];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomSurfaceSpec {
    /// Side of the random seed matrix: odd, from 3 to 11.
    pub matrix_size: usize,
    pub distribution: SurfaceDistribution,
    /// Multiplier applied to the seed matrix, in radians.
    pub scale: f64,
    /// Side of the square output.
    pub target_size: usize,
}

impl RandomSurfaceSpec {
    pub fn validate(&self) -> Result<()> {
        if !MATRIX_SIZES.contains(&self.matrix_size) {
            return Err(Error::InvalidParameter(format!(
                "matrix size must be one of 3, 5, 7, 9, 11; got {}",
                self.matrix_size
            )));
        }
        if self.target_size < self.matrix_size {
            return Err(Error::InvalidParameter(format!(
                "target size {} smaller than matrix size {}",
                self.target_size, self.matrix_size
            )));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale must be positive, got {}",
                self.scale
            )));
        }
        Ok(())
    }
}

fn random_matrix(spec: &RandomSurfaceSpec, rng: &mut impl Rng) -> Grid2D {
    let n = spec.matrix_size;
    let data: Vec<f64> = match spec.distribution {
        SurfaceDistribution::Uniform01 => (0..n * n).map(|_| rng.random::<f64>()).collect(),
        SurfaceDistribution::GaussianShifted => {
            let raw: Vec<f64> = (0..n * n).map(|_| rng.sample(StandardNormal)).collect();
            let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
            raw.into_iter().map(|v| v - lo).collect()
        }
    };
    Grid2D::new(n, n, data).expect("n >= 2")
}

/// Full-frame surface: the scaled seed matrix, upsampled to
/// `target_size x target_size`.
///
/// The interpolated surface is clamped to the range of the seed matrix so
/// that cubic overshoot cannot create negative phase.
pub fn random_surface(spec: &RandomSurfaceSpec, seed: u64) -> Result<Grid2D> {
    spec.validate()?;
    let m = random_matrix(spec, &mut rng_for(seed, 0)).map(|v| v * spec.scale);
    let (lo, hi) = (m.min(), m.max());
    Ok(bicubic_upsample(&m, spec.target_size, spec.target_size)?.map(|v| v.clamp(lo, hi)))
}

/// Zeroes everything outside the centred disk of diameter `n`.
pub(crate) fn disk_mask(surface: &Grid2D) -> Grid2D {
    let (h, w) = surface.shape();
    let (cy, cx) = ((h as f64 - 1.0) / 2.0, (w as f64 - 1.0) / 2.0);
    let r2 = (h.min(w) as f64 / 2.0).powi(2);
    Grid2D::from_fn(h, w, |i, j| {
        let d2 = (i as f64 - cy).powi(2) + (j as f64 - cx).powi(2);
        if d2 <= r2 {
            surface[(i, j)]
        } else {
            0.0
        }
    })
}

/// A random smooth object on the centred disk, zero outside.
/// Returns `(truth, wrapped)`.
pub fn gen_sample_d(spec: &RandomSurfaceSpec, seed: u64) -> Result<(Grid2D, Grid2D)> {
    let truth = disk_mask(&random_surface(spec, seed)?);
    let wrapped = wrap_grid(&truth)?;
    Ok((truth, wrapped))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_partition_unity_and_interpolate() {
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            let w = cubic_weights(t);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
        assert_eq!(cubic_weights(0.0), [0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn sample_at_nodes_returns_node_values() {
        let m = Grid2D::from_fn(4, 5, |i, j| (i * 5 + j) as f64 * 0.37 - 1.0);
        for i in 0..4 {
            for j in 0..5 {
                assert!((bicubic_sample(&m, i as f64, j as f64) - m[(i, j)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn odd_factor_upsampling_preserves_nodes() {
        // 2x2 -> 6x6: source pixel centres land on output pixels 1 and 4
        let m = Grid2D::from_rows(&[vec![1.0, 2.0], vec![3.0, 5.0]]).unwrap();
        let up = bicubic_upsample(&m, 6, 6).unwrap();
        assert_eq!(up[(1, 1)], 1.0);
        assert_eq!(up[(1, 4)], 2.0);
        assert_eq!(up[(4, 1)], 3.0);
        assert_eq!(up[(4, 4)], 5.0);
        let m = Grid2D::from_fn(3, 3, |i, j| (i * i + 2 * j) as f64);
        let up = bicubic_upsample(&m, 9, 9).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((up[(3 * i + 1, 3 * j + 1)] - m[(i, j)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn reproduces_linear_ramps_away_from_edges() {
        let m = Grid2D::from_fn(8, 8, |i, j| 0.5 * i as f64 - 0.25 * j as f64);
        for (y, x) in [(2.3, 3.7), (3.5, 3.5), (4.9, 2.1)] {
            assert!((bicubic_sample(&m, y, x) - (0.5 * y - 0.25 * x)).abs() < 1e-13);
        }
    }

    fn spec(distribution: SurfaceDistribution) -> RandomSurfaceSpec {
        RandomSurfaceSpec {
            matrix_size: 5,
            distribution,
            scale: 20.0,
            target_size: 64,
        }
    }

    #[test]
    fn constant_matrix_stays_constant() {
        let up = bicubic_upsample(&Grid2D::filled(3, 3, 2.5), 17, 12).unwrap();
        assert!(up.data().iter().all(|&v| (v - 2.5).abs() < 1e-14));
    }

    #[test]
    fn uniform_surface_within_scale() {
        for seed in 0..10 {
            let g = random_surface(&spec(SurfaceDistribution::Uniform01), seed).unwrap();
            assert!(g.min() >= 0.0 && g.max() <= 20.0);
        }
        let g = random_surface(&spec(SurfaceDistribution::GaussianShifted), 4).unwrap();
        assert_eq!(g.min(), 0.0);
    }

    #[test]
    fn sample_d_is_deterministic_and_masked() {
        let s = spec(SurfaceDistribution::GaussianShifted);
        let (a, psi) = gen_sample_d(&s, 11).unwrap();
        assert_eq!((a.clone(), psi.clone()), gen_sample_d(&s, 11).unwrap());
        assert_ne!(a, gen_sample_d(&s, 12).unwrap().0);
        assert_eq!(psi, wrap_grid(&a).unwrap());
        assert_eq!(a[(0, 0)], 0.0);
        assert_eq!(a[(63, 63)], 0.0);
        assert!(a.min() >= 0.0);
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = spec(SurfaceDistribution::Uniform01);
        s.matrix_size = 4;
        assert!(random_surface(&s, 0).is_err());
        s.matrix_size = 3;
        s.scale = f64::NAN;
        assert!(random_surface(&s, 0).is_err());
    }
}
