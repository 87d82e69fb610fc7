//! Path integration of wrapped differences.

use std::f64::consts::TAU;

use crate::grid::Grid2D;
use crate::phase::wrap;

/// Integrates wrapped first differences of a 1D sequence.
///
/// Exact whenever consecutive true differences stay below π in magnitude.
pub fn unwrap_itoh_1d(psi: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(psi.len());
    let mut k = 0.0;
    for (i, &p) in psi.iter().enumerate() {
        if i > 0 {
            k += wrap_count_step(psi[i - 1], p);
        }
        out.push(p + TAU * k);
    }
    out
}

/// Integer change in wrap count when stepping from `from` to `to`.
///
/// Tracking integers rather than accumulating floats keeps the output
/// exactly of the form `psi + 2πk`.
#[inline]
pub(crate) fn wrap_count_step(from: f64, to: f64) -> f64 {
    ((from - to + wrap(to - from)) / TAU).round()
}

/// Row-then-column integration: down the first column, then along each row.
pub fn unwrap_itoh(psi: &Grid2D) -> Grid2D {
    let (h, w) = psi.shape();
    let mut k = vec![0.0; h * w];
    for i in 1..h {
        k[i * w] = k[(i - 1) * w] + wrap_count_step(psi[(i - 1, 0)], psi[(i, 0)]);
    }
    for i in 0..h {
        for j in 1..w {
            k[i * w + j] = k[i * w + j - 1] + wrap_count_step(psi[(i, j - 1)], psi[(i, j)]);
        }
    }
    Grid2D::new(
        h,
        w,
        psi.data().iter().zip(&k).map(|(p, k)| p + TAU * k).collect(),
    )
    .expect("shape preserved")
}
