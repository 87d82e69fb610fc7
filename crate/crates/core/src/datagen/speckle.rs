//! Speckle perturbation of an unwrapped phase map.

use rand_distr::{Distribution, Exp1};

use super::rng_for;
use crate::error::{Error, Result};
use crate::grid::Grid2D;

/// `20 log10(||signal|| / ||noise||)`
pub fn snr_db(signal: &Grid2D, noisy: &Grid2D) -> Result<f64> {
    let noise = noisy.zip_map(signal, |a, b| a - b)?;
    Ok(20.0 * (signal.norm_l2() / noise.norm_l2()).log10())
}

/// Adds a zero-mean perturbation drawn from fully developed speckle
/// (unit-mean exponential intensity), scaled so that the result has exactly
/// the requested SNR against `phi`.
///
/// `snr_db = +inf` and an all-zero `phi` return `phi` unchanged.
pub fn add_speckle(phi: &Grid2D, snr_db: f64, seed: u64) -> Result<Grid2D> {
    if snr_db == f64::INFINITY {
        return Ok(phi.clone());
    }
    if !snr_db.is_finite() {
        return Err(Error::NonFinite(snr_db));
    }
    phi.ensure_finite()?;
    let signal = phi.norm_l2();
    if signal == 0.0 {
        return Ok(phi.clone());
    }
    let mut rng = rng_for(seed, 1);
    let mut noise: Vec<f64> = (0..phi.len())
        .map(|_| {
            let v: f64 = Exp1.sample(&mut rng);
            v - 1.0
        })
        .collect();
    let mean = noise.iter().sum::<f64>() / noise.len() as f64;
    noise.iter_mut().for_each(|v| *v -= mean);
    let norm = noise.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        // a single pixel has no zero-mean perturbation
        return Ok(phi.clone());
    }
    let k = signal / (norm * 10f64.powf(snr_db / 20.0));
    let data = phi.data().iter().zip(&noise).map(|(p, n)| p + k * n).collect();
    Grid2D::new(phi.height(), phi.width(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump() -> Grid2D {
        Grid2D::from_fn(48, 48, |i, j| {
            let (y, x) = (i as f64 - 23.5, j as f64 - 23.5);
            15.0 * (-(x * x + y * y) / 200.0).exp()
        })
    }

    #[test]
    fn realizes_requested_snr() {
        let phi = bump();
        for (seed, target) in [(1, 11.8), (2, 15.7), (3, 22.8), (4, -3.0)] {
            let noisy = add_speckle(&phi, target, seed).unwrap();
            assert!((snr_db(&phi, &noisy).unwrap() - target).abs() < 1e-9);
            let mean_shift = noisy.mean() - phi.mean();
            assert!(mean_shift.abs() < 1e-12);
        }
    }

    #[test]
    fn infinite_snr_and_zero_input_are_identity() {
        let phi = bump();
        assert_eq!(add_speckle(&phi, f64::INFINITY, 3).unwrap(), phi);
        let z = Grid2D::zeros(4, 4);
        assert_eq!(add_speckle(&z, 10.0, 3).unwrap(), z);
        assert!(add_speckle(&phi, f64::NAN, 3).is_err());
    }

    #[test]
    fn seeded() {
        let phi = bump();
        assert_eq!(add_speckle(&phi, 12.0, 9).unwrap(), add_speckle(&phi, 12.0, 9).unwrap());
        assert_ne!(add_speckle(&phi, 12.0, 9).unwrap(), add_speckle(&phi, 12.0, 10).unwrap());
    }
}
