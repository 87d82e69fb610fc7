//! Wrap algebra, discrete gradients, the Itoh condition, adaptive weights
//! and congruence.
//!
//! Forward differences are zero-padded: the last column of `gx` and the last
//! row of `gy` are 0. With this convention the adjoint of the gradient is the
//! negative divergence used by the Neumann Poisson solver in
//! [`crate::baselines::ls`].

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::grid::Grid2D;

/// Wraps `phi` into `[-pi, pi)` without checking finiteness.
///
/// `wrap(pi) == -pi`. NaN and infinities propagate as NaN.
#[inline]
pub fn wrap(phi: f64) -> f64 {
    if (-PI..PI).contains(&phi) {
        return phi;
    }
    let mut r = (phi + PI).rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative arguments
    if r >= TAU {
        r -= TAU;
    }
    r - PI
}

/// Checked version of [`wrap`].
pub fn wrap_scalar(phi: f64) -> Result<f64> {
    if !phi.is_finite() {
        return Err(Error::NonFinite(phi));
    }
    Ok(wrap(phi))
}

pub fn wrap_grid(phi: &Grid2D) -> Result<Grid2D> {
    phi.ensure_finite()?;
    Ok(phi.map(wrap))
}

/// Per-pixel forward differences `(gx, gy)` of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientField {
    pub gx: Grid2D,
    pub gy: Grid2D,
}

impl GradientField {
    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            gx: Grid2D::zeros(height, width),
            gy: Grid2D::zeros(height, width),
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.gx.height()
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.gx.width()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.gx.shape()
    }

    /// Wraps both components.
    pub fn wrapped(&self) -> Self {
        Self {
            gx: self.gx.map(wrap),
            gy: self.gy.map(wrap),
        }
    }

    /// Euclidean norm of the 2-vector at every pixel.
    pub fn pixel_norms(&self) -> Grid2D {
        self.gx
            .zip_map(&self.gy, f64::hypot)
            .expect("components share a shape")
    }

    /// Componentwise difference `self - other`.
    pub fn sub(&self, other: &GradientField) -> Result<Self> {
        Ok(Self {
            gx: self.gx.zip_map(&other.gx, |a, b| a - b)?,
            gy: self.gy.zip_map(&other.gy, |a, b| a - b)?,
        })
    }
}

pub fn forward_gradient(phi: &Grid2D) -> GradientField {
    let (h, w) = phi.shape();
    let mut gx = Grid2D::zeros(h, w);
    let mut gy = Grid2D::zeros(h, w);
    for i in 0..h {
        for j in 0..w {
            let v = phi[(i, j)];
            if j + 1 < w {
                gx[(i, j)] = phi[(i, j + 1)] - v;
            }
            if i + 1 < h {
                gy[(i, j)] = phi[(i + 1, j)] - v;
            }
        }
    }
    GradientField { gx, gy }
}

/// `W(Δψ)`: the wrapped forward differences of a wrapped phase map.
pub fn wrapped_gradient(psi: &Grid2D) -> GradientField {
    forward_gradient(psi).wrapped()
}

/// Adjoint of [`forward_gradient`] (the negative divergence).
pub fn gradient_adjoint(field: &GradientField) -> Grid2D {
    let (h, w) = field.shape();
    let mut out = Grid2D::zeros(h, w);
    for i in 0..h {
        for j in 0..w {
            let mut v = 0.0;
            if j + 1 < w {
                v -= field.gx[(i, j)];
            }
            if j > 0 {
                v += field.gx[(i, j - 1)];
            }
            if i + 1 < h {
                v -= field.gy[(i, j)];
            }
            if i > 0 {
                v += field.gy[(i - 1, j)];
            }
            out[(i, j)] = v;
        }
    }
    out
}

/// Binary mask of pixels where `||[Δφ]_n||² > π²`.
pub fn itoh_violations(phi: &Grid2D) -> Grid2D {
    let g = forward_gradient(phi);
    g.gx
        .zip_map(&g.gy, |x, y| if x * x + y * y > PI * PI { 1.0 } else { 0.0 })
        .expect("components share a shape")
}

/// Clamping bounds for the adaptive weights.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightBounds {
    eps_min: f64,
    eps_max: f64,
}

impl WeightBounds {
    pub fn new(eps_min: f64, eps_max: f64) -> Result<Self> {
        if !(eps_min > 0.0 && eps_min < eps_max && eps_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "weight bounds require 0 < eps_min < eps_max, got [{eps_min}, {eps_max}]"
            )));
        }
        Ok(Self { eps_min, eps_max })
    }

    pub fn eps_min(&self) -> f64 {
        self.eps_min
    }

    pub fn eps_max(&self) -> f64 {
        self.eps_max
    }

    /// Weight for a residual of norm `e`.
    #[inline]
    pub fn weight(&self, e: f64) -> f64 {
        if e >= self.eps_max {
            1.0 / self.eps_max
        } else if e <= self.eps_min {
            1.0 / self.eps_min
        } else {
            1.0 / e
        }
    }
}

/// Per-pixel norm of `Δφ - target`.
pub fn residual_norms(phi: &Grid2D, target: &GradientField) -> Result<Grid2D> {
    Ok(forward_gradient(phi).sub(target)?.pixel_norms())
}

pub fn adaptive_weights(phi: &Grid2D, psi: &Grid2D, bounds: WeightBounds) -> Result<Grid2D> {
    phi.ensure_same_shape(psi)?;
    weights_from_target(phi, &wrapped_gradient(psi), bounds)
}

/// Same as [`adaptive_weights`] with `W(Δψ)` precomputed.
pub fn weights_from_target(
    phi: &Grid2D,
    target: &GradientField,
    bounds: WeightBounds,
) -> Result<Grid2D> {
    Ok(residual_norms(phi, target)?.map(|e| bounds.weight(e)))
}

/// `φ̂ + W(ψ - φ̂)`, the closest grid to `phi_hat` that rewraps to `psi`.
pub fn congruence(psi: &Grid2D, phi_hat: &Grid2D) -> Result<Grid2D> {
    psi.zip_map(phi_hat, |p, f| f + wrap(p - f))
}

/// `Σ_n w_n ||[Δφ - W(Δψ)]_n||`.
pub fn weighted_energy(phi: &Grid2D, psi: &Grid2D, w: &Grid2D) -> Result<f64> {
    phi.ensure_same_shape(psi)?;
    phi.ensure_same_shape(w)?;
    let e = residual_norms(phi, &wrapped_gradient(psi))?;
    Ok(e.data().iter().zip(w.data()).map(|(e, w)| e * w).sum())
}
