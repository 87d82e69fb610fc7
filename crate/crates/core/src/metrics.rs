//! Reconstruction quality metrics.

use std::f64::consts::TAU;
use std::fmt;

use crate::error::{Error, Result};
use crate::grid::Grid2D;
use crate::phase::wrap;

/// Values above this are reported as infinite.
pub const RSNR_CAP_DB: f64 = 100.0;

/// Offset-regressed signal-to-noise ratio.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rsnr {
    /// `f64::INFINITY` when the raw value exceeds [`RSNR_CAP_DB`].
    pub value_db: f64,
    /// The additive offset applied to the estimate.
    pub offset: f64,
}

impl Rsnr {
    pub fn is_infinite(&self) -> bool {
        self.value_db.is_infinite()
    }
}

impl fmt::Display for Rsnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        format_db(self.value_db, f)
    }
}

fn format_db(v: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if v.is_infinite() && v > 0.0 {
        f.write_str("inf")
    } else if let Some(p) = f.precision() {
        write!(f, "{v:.p$}")
    } else {
        write!(f, "{v}")
    }
}

/// RSNR maximized over a global additive offset on the estimate.
///
/// The optimal offset is `mean(truth - estimate)`; it is not restricted to be
/// positive.
pub fn rsnr(estimate: &Grid2D, truth: &Grid2D) -> Result<Rsnr> {
    estimate.ensure_same_shape(truth)?;
    let signal = truth.norm_l2();
    if signal == 0.0 {
        return Err(Error::ZeroNorm("truth"));
    }
    let n = truth.len() as f64;
    let offset = truth
        .data()
        .iter()
        .zip(estimate.data())
        .map(|(t, e)| t - e)
        .sum::<f64>()
        / n;
    let noise = estimate
        .data()
        .iter()
        .zip(truth.data())
        .map(|(e, t)| {
            let d = e + offset - t;
            d * d
        })
        .sum::<f64>()
        .sqrt();
    let raw = if noise == 0.0 {
        f64::INFINITY
    } else {
        20.0 * (signal / noise).log10()
    };
    Ok(Rsnr {
        value_db: if raw > RSNR_CAP_DB { f64::INFINITY } else { raw },
        offset,
    })
}

pub const SSIM_C1: f64 = 1e-4;
pub const SSIM_C2: f64 = 9e-4;
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;

fn gaussian_kernel() -> [f64; SSIM_WINDOW] {
    let mut k = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable Gaussian filter over the positions where the window fits.
fn filter_valid(g: &[f64], h: usize, w: usize, k: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let (oh, ow) = (h + 1 - SSIM_WINDOW, w + 1 - SSIM_WINDOW);
    let mut tmp = vec![0.0; h * ow];
    for i in 0..h {
        for j in 0..ow {
            tmp[i * ow + j] = (0..SSIM_WINDOW).map(|t| k[t] * g[i * w + j + t]).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for i in 0..oh {
        for j in 0..ow {
            out[i * ow + j] = (0..SSIM_WINDOW).map(|t| k[t] * tmp[(i + t) * ow + j]).sum();
        }
    }
    out
}

/// Mean structural similarity with an 11x11 Gaussian window (σ = 1.5).
///
/// The structure term uses the local cross-covariance, so `ssim(x, -x)` is
/// negative for textured `x`. Only window positions fully inside the grid
/// are averaged.
pub fn ssim(estimate: &Grid2D, truth: &Grid2D) -> Result<f64> {
    estimate.ensure_same_shape(truth)?;
    let (h, w) = truth.shape();
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::InvalidParameter(format!(
            "ssim needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {h}x{w}"
        )));
    }
    let k = gaussian_kernel();
    let (x, y) = (estimate.data(), truth.data());
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    let mx = filter_valid(x, h, w, &k);
    let my = filter_valid(y, h, w, &k);
    let sxx = filter_valid(&xx, h, w, &k);
    let syy = filter_valid(&yy, h, w, &k);
    let sxy = filter_valid(&xy, h, w, &k);
    let mut total = 0.0;
    for n in 0..mx.len() {
        let (ux, uy) = (mx[n], my[n]);
        let vx = sxx[n] - ux * ux;
        let vy = syy[n] - uy * uy;
        let cov = sxy[n] - ux * uy;
        total += ((2.0 * ux * uy + SSIM_C1) * (2.0 * cov + SSIM_C2))
            / ((ux * ux + uy * uy + SSIM_C1) * (vx + vy + SSIM_C2));
    }
    Ok(total / mx.len() as f64)
}

/// `||ψ - W(φ̃)||₂ / ||ψ||₂`
pub fn rewrap_error(phi_tilde: &Grid2D, psi: &Grid2D) -> Result<f64> {
    phi_tilde.ensure_same_shape(psi)?;
    let denom = psi.norm_l2();
    if denom == 0.0 {
        return Err(Error::ZeroNorm("wrapped phase"));
    }
    let num = psi
        .data()
        .iter()
        .zip(phi_tilde.data())
        .map(|(p, f)| {
            let d = p - wrap(*f);
            d * d
        })
        .sum::<f64>()
        .sqrt();
    Ok(num / denom)
}

/// Per-pixel difference of estimated and true wrap counts.
pub fn wrap_count_error(estimate: &Grid2D, truth: &Grid2D, psi: &Grid2D) -> Result<Grid2D> {
    estimate.ensure_same_shape(truth)?;
    estimate.ensure_same_shape(psi)?;
    let mut out = Grid2D::zeros(psi.height(), psi.width());
    for (n, o) in out.data_mut().iter_mut().enumerate() {
        let p = psi.data()[n];
        *o = ((estimate.data()[n] - p) / TAU).round() - ((truth.data()[n] - p) / TAU).round();
    }
    Ok(out)
}
