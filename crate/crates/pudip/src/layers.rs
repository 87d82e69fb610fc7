//! Differentiable layers specific to phase unwrapping.

use std::sync::Arc;

use phz_core::phase::{forward_gradient, gradient_adjoint, GradientField};
use phz_core::Grid2D;
use phz_nn::{Function, Tensor};

use crate::config::OffsetMode;

fn as_grid(t: &Tensor) -> phz_nn::Result<Grid2D> {
    let (c, h, w) = t.chw()?;
    if c != 1 {
        return Err(phz_nn::NnError::Shape(format!("expected one channel, got {c}")));
    }
    Ok(Grid2D::new(h, w, t.data().to_vec()).expect("shape checked"))
}

/// Subtracts a scalar statistic of the map from every pixel.
#[derive(Clone, Debug)]
pub struct OffsetLayer {
    mode: OffsetMode,
}

impl OffsetLayer {
    pub fn new(mode: OffsetMode) -> Self {
        Self { mode }
    }

    /// Flat indices that define the statistic, with their weights.
    fn support(&self, t: &Tensor) -> Vec<(usize, f64)> {
        let (_, h, w) = t.chw().expect("checked in forward");
        match self.mode {
            OffsetMode::MinSubtract => {
                let mut best = 0;
                for (i, &v) in t.data().iter().enumerate() {
                    if v < t.data()[best] {
                        best = i;
                    }
                }
                vec![(best, 1.0)]
            }
            OffsetMode::CornerMeanSubtract { height, width } => {
                let (ch, cw) = (height.min(h), width.min(w));
                let k = 1.0 / (ch * cw) as f64;
                (0..ch)
                    .flat_map(|i| (0..cw).map(move |j| (i * w + j, k)))
                    .collect()
            }
        }
    }
}

impl Function for OffsetLayer {
    fn forward(&mut self, input: &Tensor) -> phz_nn::Result<Tensor> {
        input.chw()?;
        let offset: f64 = self.support(input).iter().map(|&(i, k)| k * input.data()[i]).sum();
        Tensor::new(input.shape(), input.data().iter().map(|v| v - offset).collect())
    }

    fn backward(&self, input: &Tensor, _output: &Tensor, grad_output: &[f64]) -> Vec<f64> {
        let total: f64 = grad_output.iter().sum();
        let mut dx = grad_output.to_vec();
        for (i, k) in self.support(input) {
            dx[i] -= k * total;
        }
        dx
    }
}

/// `Σ_n w_n sqrt(|[Δφ - target]_n|² + δ)` over a one-channel map `φ`.
///
/// The weights are constants: no gradient flows into them.
#[derive(Clone, Debug)]
pub struct WeightedResidualLoss {
    target: Arc<GradientField>,
    weights: Arc<Grid2D>,
    delta: f64,
}

impl WeightedResidualLoss {
    pub fn new(target: Arc<GradientField>, weights: Arc<Grid2D>, delta: f64) -> Self {
        Self {
            target,
            weights,
            delta,
        }
    }

    fn residual(&self, phi: &Grid2D) -> (Grid2D, Grid2D) {
        let g = forward_gradient(phi);
        let rx = g.gx.zip_map(&self.target.gx, |a, b| a - b).expect("same shape");
        let ry = g.gy.zip_map(&self.target.gy, |a, b| a - b).expect("same shape");
        (rx, ry)
    }

    pub fn evaluate(&self, phi: &Grid2D) -> f64 {
        let (rx, ry) = self.residual(phi);
        let mut acc = 0.0;
        for n in 0..phi.len() {
            let (x, y) = (rx.data()[n], ry.data()[n]);
            acc += self.weights.data()[n] * (x * x + y * y + self.delta).sqrt();
        }
        acc
    }
}

impl Function for WeightedResidualLoss {
    fn forward(&mut self, input: &Tensor) -> phz_nn::Result<Tensor> {
        let phi = as_grid(input)?;
        if phi.shape() != self.weights.shape() || phi.shape() != self.target.shape() {
            return Err(phz_nn::NnError::Shape(format!(
                "loss over {:?} with weights {:?}",
                phi.shape(),
                self.weights.shape()
            )));
        }
        Ok(Tensor::scalar(self.evaluate(&phi)))
    }

    fn backward(&self, input: &Tensor, _output: &Tensor, grad_output: &[f64]) -> Vec<f64> {
        let phi = as_grid(input).expect("checked in forward");
        let (mut rx, mut ry) = self.residual(&phi);
        let g = grad_output[0];
        for n in 0..phi.len() {
            let (x, y) = (rx.data()[n], ry.data()[n]);
            let k = g * self.weights.data()[n] / (x * x + y * y + self.delta).sqrt();
            rx.data_mut()[n] = k * x;
            ry.data_mut()[n] = k * y;
        }
        gradient_adjoint(&GradientField { gx: rx, gy: ry }).into_data()
    }
}

/// Evaluates the weighted residual loss of a one-channel output map.
pub fn pudip_loss(output: &Tensor, psi: &Grid2D, weights: &Grid2D, delta: f64) -> crate::Result<f64> {
    let phi = as_grid(output)?;
    phi.ensure_same_shape(psi)?;
    phi.ensure_same_shape(weights)?;
    let loss = WeightedResidualLoss::new(
        Arc::new(phz_core::wrapped_gradient(psi)),
        Arc::new(weights.clone()),
        delta,
    );
    Ok(loss.evaluate(&phi))
}
