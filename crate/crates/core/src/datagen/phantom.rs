//! Straight-ray phase projection of ellipsoidal refractive-index phantoms.
//!
//! Rays travel along `x3`. For each pixel the ray is split into intervals
//! where it crosses an ellipsoid core or its shell; wherever several
//! intervals overlap the highest refractive index is used.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::grid::Grid2D;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ellipsoid {
    /// `(x1, x2, x3)` in µm; `x1` runs along columns and `x2` along rows.
    pub center: [f64; 3],
    pub semi_axes: [f64; 3],
    /// Core refractive index.
    pub n_core: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhantomSpec {
    pub ellipsoids: Vec<Ellipsoid>,
    /// Refractive index of the outer layer around every ellipsoid.
    pub n_shell: f64,
    /// Thickness of the outer layer in µm; zero disables it.
    pub shell_thickness: f64,
    pub n_medium: f64,
    /// Wavelength in µm.
    pub wavelength: f64,
    /// Output pixel pitch in µm.
    pub pixel_pitch: f64,
}

impl PhantomSpec {
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidParameter(msg));
        let ri = |n: f64| n.is_finite() && n > 1.0;
        if !ri(self.n_medium) || !ri(self.n_shell) {
            return invalid("refractive indices must exceed 1".into());
        }
        for (k, e) in self.ellipsoids.iter().enumerate() {
            if !ri(e.n_core) {
                return invalid(format!("ellipsoid {k}: refractive index must exceed 1"));
            }
            if e.semi_axes.iter().any(|&a| !(a.is_finite() && a > 0.0)) {
                return invalid(format!("ellipsoid {k}: semi-axes must be positive"));
            }
            if e.center.iter().any(|c| !c.is_finite()) {
                return invalid(format!("ellipsoid {k}: non-finite center"));
            }
        }
        if !(self.shell_thickness.is_finite() && self.shell_thickness >= 0.0) {
            return invalid("shell thickness must be non-negative".into());
        }
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return invalid("wavelength must be positive".into());
        }
        if !(self.pixel_pitch > 0.0 && self.pixel_pitch.is_finite()) {
            return invalid("pixel pitch must be positive".into());
        }
        Ok(())
    }
}

/// Entry and exit `x3` of the ray `(x1, x2)` through an ellipsoid grown by `pad`.
fn chord(e: &Ellipsoid, pad: f64, x1: f64, x2: f64) -> Option<(f64, f64)> {
    let [a1, a2, a3] = e.semi_axes.map(|a| a + pad);
    let s = 1.0 - ((x1 - e.center[0]) / a1).powi(2) - ((x2 - e.center[1]) / a2).powi(2);
    (s > 0.0).then(|| {
        let half = a3 * s.sqrt();
        (e.center[2] - half, e.center[2] + half)
    })
}

/// Optical path difference `∫ (n - n_m) dx3` along one ray.
fn path_difference(spec: &PhantomSpec, x1: f64, x2: f64) -> f64 {
    // (start, end, index)
    let mut spans: Vec<(f64, f64, f64)> = Vec::new();
    for e in &spec.ellipsoids {
        let core = chord(e, 0.0, x1, x2);
        if let Some((lo, hi)) = core {
            spans.push((lo, hi, e.n_core));
        }
        if spec.shell_thickness > 0.0 {
            if let Some((lo, hi)) = chord(e, spec.shell_thickness, x1, x2) {
                match core {
                    Some((clo, chi)) => {
                        spans.push((lo, clo, spec.n_shell));
                        spans.push((chi, hi, spec.n_shell));
                    }
                    None => spans.push((lo, hi, spec.n_shell)),
                }
            }
        }
    }
    if spans.is_empty() {
        return 0.0;
    }
    let mut cuts: Vec<f64> = spans.iter().flat_map(|&(a, b, _)| [a, b]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .map(|seg| {
            let mid = 0.5 * (seg[0] + seg[1]);
            let n = spans
                .iter()
                .filter(|&&(a, b, _)| a <= mid && mid <= b)
                .map(|s| s.2)
                .fold(f64::NEG_INFINITY, f64::max);
            if n.is_finite() {
                (n - spec.n_medium) * (seg[1] - seg[0])
            } else {
                0.0
            }
        })
        .sum()
}

/// `(2π/λ) ∫ (n - n_m) dx3` for each pixel of a `height x width` grid
/// centred on the optical axis.
pub fn straight_ray_phase(spec: &PhantomSpec, height: usize, width: usize) -> Result<Grid2D> {
    spec.validate()?;
    if height == 0 || width == 0 {
        return Err(Error::EmptyGrid { height, width });
    }
    let k = TAU / spec.wavelength;
    let cy = (height as f64 - 1.0) / 2.0;
    let cx = (width as f64 - 1.0) / 2.0;
    Ok(Grid2D::from_fn(height, width, |i, j| {
        let x1 = (j as f64 - cx) * spec.pixel_pitch;
        let x2 = (i as f64 - cy) * spec.pixel_pitch;
        k * path_difference(spec, x1, x2)
    }))
}
