//! Cropped elliptical Gaussian surfaces.

use crate::error::{Error, Result};
use crate::grid::Grid2D;

/// An elliptical Gaussian bump with an angular sector removed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipseSpec {
    /// Vertical semi-axis in pixels.
    pub radius_y: f64,
    /// Horizontal semi-axis in pixels.
    pub radius_x: f64,
    /// Peak value in radians.
    pub amplitude: f64,
    /// Gaussian width in normalized elliptical radius units.
    pub sigma: f64,
    /// Degrees in `[0, 360]`; the sector `[0, crop_angle)` is zeroed.
    pub crop_angle: f64,
}

impl EllipseSpec {
    /// Radii 80/110 and peak 15 on a 256x256 frame.
    pub fn sample_b(sigma: f64, crop_angle: f64) -> Self {
        Self {
            radius_y: 80.0,
            radius_x: 110.0,
            amplitude: 15.0,
            sigma,
            crop_angle,
        }
    }

    /// Scales both radii, e.g. to move a 256-pixel setup to a smaller frame.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.radius_y *= factor;
        self.radius_x *= factor;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !(positive(self.radius_y) && positive(self.radius_x)) {
            return Err(Error::InvalidParameter("ellipse radii must be positive".into()));
        }
        if !positive(self.amplitude) || !positive(self.sigma) {
            return Err(Error::InvalidParameter(
                "ellipse amplitude and sigma must be positive".into(),
            ));
        }
        if !(0.0..=360.0).contains(&self.crop_angle) {
            return Err(Error::InvalidParameter(format!(
                "crop angle {} outside [0, 360]",
                self.crop_angle
            )));
        }
        Ok(())
    }
}

/// Angle of `(y, x)` in degrees, in `[0, 360)`, with `y` pointing down the
/// rows: the positive sweep runs from +x towards +y on screen.
fn sector_angle(y: f64, x: f64) -> f64 {
    let a = y.atan2(x).to_degrees();
    if a < 0.0 {
        a + 360.0
    } else {
        a
    }
}

pub fn gen_sample_b(spec: &EllipseSpec, height: usize, width: usize) -> Result<Grid2D> {
    spec.validate()?;
    if height == 0 || width == 0 {
        return Err(Error::EmptyGrid { height, width });
    }
    let cy = (height as f64 - 1.0) / 2.0;
    let cx = (width as f64 - 1.0) / 2.0;
    let two_s2 = 2.0 * spec.sigma * spec.sigma;
    Ok(Grid2D::from_fn(height, width, |i, j| {
        let (y, x) = (i as f64 - cy, j as f64 - cx);
        let r2 = (y / spec.radius_y).powi(2) + (x / spec.radius_x).powi(2);
        if r2 > 1.0 || sector_angle(y, x) < spec.crop_angle {
            0.0
        } else {
            spec.amplitude * (-r2 / two_s2).exp()
        }
    }))
}

/// Radii 102/120 at crop 135°, rescaled so that the grid maximum is `max_value`.
///
/// The radii are given for a 256x256 frame and scaled with the frame height.
pub fn gen_sample_c(max_value: f64, sigma: f64, height: usize, width: usize) -> Result<Grid2D> {
    if !(max_value.is_finite() && max_value > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "max_value must be positive, got {max_value}"
        )));
    }
    let spec = EllipseSpec {
        radius_y: 102.0,
        radius_x: 120.0,
        amplitude: 1.0,
        sigma,
        crop_angle: 135.0,
    }
    .scaled(height as f64 / 256.0);
    let g = gen_sample_b(&spec, height, width)?;
    let peak = g.max();
    if peak <= 0.0 {
        return Err(Error::InvalidParameter("ellipse does not cover any pixel".into()));
    }
    let mut out = g.map(|v| (v / peak * max_value).min(max_value));
    let argmax = g.data().iter().position(|&v| v == peak).expect("peak exists");
    out.data_mut()[argmax] = max_value;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::{itoh_violations, wrap, wrap_grid};

    #[test]
    fn uncropped_peak_is_amplitude() {
        let spec = EllipseSpec::sample_b(0.45, 0.0);
        let g = gen_sample_b(&spec, 257, 257).unwrap();
        assert_eq!(g[(128, 128)], 15.0);
        assert_eq!(g.max(), 15.0);
        assert_eq!(g[(0, 0)], 0.0);
    }

    #[test]
    fn full_crop_is_zero() {
        let g = gen_sample_b(&EllipseSpec::sample_b(0.45, 360.0), 64, 64).unwrap();
        assert_eq!(g, Grid2D::zeros(64, 64));
    }

    #[test]
    fn half_crop_keeps_half_the_support() {
        let count = |angle| {
            let g = gen_sample_b(&EllipseSpec::sample_b(0.45, angle), 256, 256).unwrap();
            g.data().iter().filter(|&&v| v > 0.0).count() as f64
        };
        let ratio = count(180.0) / count(0.0);
        assert!((ratio - 0.5).abs() < 0.02, "{ratio}");
    }

    #[test]
    fn crop_removes_lower_right_quadrant_first() {
        let g = gen_sample_b(&EllipseSpec::sample_b(0.45, 90.0), 256, 256).unwrap();
        assert_eq!(g[(150, 150)], 0.0);
        assert!(g[(100, 150)] > 0.0);
        assert!(g[(150, 100)] > 0.0);
    }

    #[test]
    fn uncropped_sample_b_satisfies_itoh() {
        // the edge cliff 15 exp(-1 / 2σ²) can hit both gradient components at
        // once, so the norm stays below π only up to σ ≈ 0.51
        for sigma in [0.30, 0.45, 0.50] {
            let g = gen_sample_b(&EllipseSpec::sample_b(sigma, 0.0), 256, 256).unwrap();
            assert_eq!(itoh_violations(&g).sum(), 0.0, "sigma {sigma}");
        }
        let g = gen_sample_b(&EllipseSpec::sample_b(0.65, 0.0), 256, 256).unwrap();
        assert!(itoh_violations(&g).sum() > 0.0);
    }

    #[test]
    fn sample_c_fixtures() {
        let g = gen_sample_c(6.0, 0.45, 256, 256).unwrap();
        assert_eq!(g.max(), 6.0);
        assert_eq!(g[(0, 0)], 0.0);
        assert_eq!(g[(255, 128)], 0.0);

        let g = gen_sample_c(42.0, 0.45, 256, 256).unwrap();
        let psi = wrap_grid(&g).unwrap();
        let row = psi.row(127);
        let fronts = row.windows(2).filter(|p| (p[1] - p[0]).abs() > std::f64::consts::PI).count();
        let expected = row
            .windows(2)
            .filter(|p| wrap(p[1] - p[0]) != p[1] - p[0])
            .count();
        assert_eq!(fronts, expected);
        assert!(fronts >= 6, "{fronts}");
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(gen_sample_b(&EllipseSpec::sample_b(0.0, 0.0), 8, 8).is_err());
        assert!(gen_sample_b(&EllipseSpec::sample_b(0.4, 400.0), 8, 8).is_err());
        assert!(gen_sample_c(-1.0, 0.4, 8, 8).is_err());
    }
}
