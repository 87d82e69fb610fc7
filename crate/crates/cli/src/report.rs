//! Metric rows and number formatting.

use phz_core::metrics::{rewrap_error, rsnr, ssim};
use phz_core::Grid2D;

use crate::error::Result;

/// RSNR in dB with `inf` for exact recoveries.
pub fn fmt_db(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else {
        format!("{v:.4}")
    }
}

/// SSIM needs an 11x11 window; smaller grids report `n/a`.
pub fn fmt_ssim(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{v:.6}"))
}

pub fn fmt_rewrap(v: f64) -> String {
    format!("{v:.3e}")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    pub rsnr_db: f64,
    pub ssim: Option<f64>,
    pub rewrap: Option<f64>,
}

pub fn measure(estimate: &Grid2D, truth: &Grid2D, wrapped: Option<&Grid2D>) -> Result<Metrics> {
    let rsnr_db = rsnr(estimate, truth)?.value_db;
    let ssim = if truth.height() >= 11 && truth.width() >= 11 {
        Some(ssim(estimate, truth)?)
    } else {
        None
    };
    let rewrap = wrapped.map(|w| rewrap_error(estimate, w)).transpose()?;
    Ok(Metrics { rsnr_db, ssim, rewrap })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats() {
        assert_eq!(fmt_db(f64::INFINITY), "inf");
        assert_eq!(fmt_db(28.7541), "28.7541");
        assert_eq!(fmt_ssim(None), "n/a");
        assert_eq!(fmt_rewrap(0.0), "0.000e0");
    }
}
