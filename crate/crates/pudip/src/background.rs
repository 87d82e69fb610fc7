//! Background flattening and foreground segmentation.

use nalgebra::{DMatrix, DVector};
use phz_core::Grid2D;

use crate::error::{PudipError, Result};

/// Population standard deviation over the `window x window` neighbourhood,
/// truncated at the border.
pub fn local_std(phi: &Grid2D, window: usize) -> Grid2D {
    let r = (window / 2) as isize;
    let (h, w) = phi.shape();
    Grid2D::from_fn(h, w, |i, j| {
        let (mut s, mut ss, mut n) = (0.0, 0.0, 0.0);
        for di in -r..=r {
            for dj in -r..=r {
                let (y, x) = (i as isize + di, j as isize + dj);
                if y < 0 || x < 0 || y >= h as isize || x >= w as isize {
                    continue;
                }
                let v = phi[(y as usize, x as usize)];
                s += v;
                ss += v * v;
                n += 1.0;
            }
        }
        let mean = s / n;
        (ss / n - mean * mean).max(0.0).sqrt()
    })
}

fn monomials(y: f64, x: f64, degree: usize) -> impl Iterator<Item = f64> {
    (0..=degree).flat_map(move |total| (0..=total).map(move |py| y.powi(py as i32) * x.powi((total - py) as i32)))
}

/// Subtracts a least-squares polynomial of total degree `degree` fitted on
/// the pixels whose local standard deviation is below `t_sigma`.
pub fn remove_background(phi: &Grid2D, t_sigma: f64, degree: usize, window: usize) -> Result<Grid2D> {
    let (h, w) = phi.shape();
    if h < 3 || w < 3 {
        return Err(PudipError::Config(format!("background removal needs at least 3x3, got {h}x{w}")));
    }
    if !(t_sigma.is_finite() && t_sigma > 0.0) {
        return Err(PudipError::Config(format!("t_sigma must be positive, got {t_sigma}")));
    }
    if window == 0 || window.is_multiple_of(2) {
        return Err(PudipError::Config(format!("window must be odd, got {window}")));
    }
    phi.ensure_finite()?;
    let terms = (degree + 1) * (degree + 2) / 2;
    let sd = local_std(phi, window);
    // coordinates in [-1, 1] keep the design matrix well conditioned
    let norm = |i: usize, n: usize| if n > 1 { 2.0 * i as f64 / (n - 1) as f64 - 1.0 } else { 0.0 };
    let mask: Vec<(usize, usize)> = (0..h)
        .flat_map(|i| (0..w).map(move |j| (i, j)))
        .filter(|&(i, j)| sd[(i, j)] < t_sigma)
        .collect();
    if mask.len() < terms {
        return Err(PudipError::SparseBackground { needed: terms, found: mask.len() });
    }
    let a = DMatrix::from_row_iterator(
        mask.len(),
        terms,
        mask.iter().flat_map(|&(i, j)| monomials(norm(i, h), norm(j, w), degree)),
    );
    let b = DVector::from_iterator(mask.len(), mask.iter().map(|&(i, j)| phi[(i, j)]));
    let coef = a
        .svd(true, true)
        .solve(&b, 1e-12)
        .map_err(|e| PudipError::Config(format!("background fit failed: {e}")))?;
    Ok(Grid2D::from_fn(h, w, |i, j| {
        let fit: f64 = monomials(norm(i, h), norm(j, w), degree).zip(coef.iter()).map(|(m, c)| m * c).sum();
        phi[(i, j)] - fit
    }))
}

/// 1 where `phi >= fraction * max(phi)`, else 0.
pub fn segment_threshold(phi: &Grid2D, fraction: f64) -> Result<Grid2D> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(PudipError::Config(format!("fraction must be in (0, 1), got {fraction}")));
    }
    let t = fraction * phi.max();
    Ok(phi.map(|v| if v >= t { 1.0 } else { 0.0 }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic(i: usize, j: usize) -> f64 {
        let (y, x) = (i as f64 / 40.0, j as f64 / 40.0);
        0.3 + 0.5 * x - 0.2 * y + 0.1 * x * y + 0.05 * x * x * x - 0.07 * y * y * x
    }

    #[test]
    fn exact_polynomial_is_removed() {
        let phi = Grid2D::from_fn(40, 36, cubic);
        assert!(local_std(&phi, 3).max() < 0.5);
        let out = remove_background(&phi, 0.5, 3, 3).unwrap();
        assert!(out.max_abs() < 1e-6, "{}", out.max_abs());
        let flat = remove_background(&Grid2D::filled(8, 8, 4.2), 0.5, 3, 3).unwrap();
        assert!(flat.max_abs() < 1e-9);
    }

    #[test]
    fn bump_survives_background_removal() {
        let bump = |i: usize, j: usize| {
            let r2 = (i as f64 - 20.0).powi(2) + (j as f64 - 20.0).powi(2);
            // pixel-scale texture keeps the bump out of the background mask
            let tex = if (i + j).is_multiple_of(2) { 2.0 } else { -2.0 };
            if r2 < 49.0 { 10.0 + tex + 0.1 * r2 } else { 0.0 }
        };
        let phi = Grid2D::from_fn(40, 40, |i, j| cubic(i, j) + bump(i, j));
        let out = remove_background(&phi, 0.5, 3, 3).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..40 {
            for j in 0..40 {
                worst = worst.max((out[(i, j)] - bump(i, j)).abs());
            }
        }
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn too_few_background_pixels() {
        let noisy = Grid2D::from_fn(6, 6, |i, j| if (i + j) % 2 == 0 { 5.0 } else { -5.0 });
        assert!(matches!(
            remove_background(&noisy, 0.5, 3, 3),
            Err(PudipError::SparseBackground { needed: 10, found: 0 })
        ));
        assert!(remove_background(&Grid2D::zeros(2, 5), 0.5, 3, 3).is_err());
    }

    #[test]
    fn segmentation_fixtures() {
        assert_eq!(segment_threshold(&Grid2D::filled(3, 3, 2.0), 0.2).unwrap(), Grid2D::filled(3, 3, 1.0));
        assert_eq!(segment_threshold(&Grid2D::zeros(2, 2), 0.2).unwrap(), Grid2D::filled(2, 2, 1.0));
        let phi = Grid2D::from_rows(&[vec![0.0, 1.9, 2.0], vec![10.0, 3.0, -1.0]]).unwrap();
        let m = segment_threshold(&phi, 0.2).unwrap();
        assert_eq!(m, Grid2D::from_rows(&[vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]).unwrap());
        assert!(segment_threshold(&phi, 1.0).is_err());
    }
}
