//! The optimization loop.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::{Duration, Instant};

use phz_core::phase::{congruence, weights_from_target, wrapped_gradient};
use phz_core::Grid2D;
use phz_nn::{Adam, Graph};

use crate::config::{GeneratorConfig, OffsetMode, TrainConfig};
use crate::error::{PudipError, Result};
use crate::generator::{sample_input, Generator};
use crate::layers::WeightedResidualLoss;

/// Everything recorded during one run.
#[derive(Clone, Debug)]
pub struct RunReport {
    /// Loss at each iteration, before that iteration's update.
    pub losses: Vec<f64>,
    /// Generator output after the last update.
    pub phi_hat: Grid2D,
    /// `phi_hat` made congruent with the input.
    pub phi_tilde: Grid2D,
    pub seed: u64,
    pub generator: GeneratorConfig,
    pub train: TrainConfig,
    pub wall_time: Duration,
}

impl RunReport {
    /// `# key=value` header lines, then one `iteration<TAB>loss` line per
    /// iteration. Wall time is left out so logs of equal runs are equal.
    pub fn to_log(&self) -> String {
        let g = &self.generator;
        let t = &self.train;
        let offset = match g.offset_mode {
            OffsetMode::MinSubtract => "min".to_string(),
            OffsetMode::CornerMeanSubtract { height, width } => format!("corner{height}x{width}"),
        };
        let mut out = String::new();
        let header = [
            ("seed", self.seed.to_string()),
            ("height", self.phi_hat.height().to_string()),
            ("width", self.phi_hat.width().to_string()),
            ("input_channels", g.input_channels.to_string()),
            ("stages", g.stages.to_string()),
            ("body_channels", g.body_channels.to_string()),
            ("skip_channels", g.skip_channels.to_string()),
            ("offset_mode", offset),
            ("iterations", t.iterations.to_string()),
            ("lr", format!("{:?}", t.lr)),
            ("eps_min", format!("{:?}", t.weight_bounds.eps_min())),
            ("eps_max", format!("{:?}", t.weight_bounds.eps_max())),
            ("refresh_every", t.refresh_every.to_string()),
            ("delta", format!("{:?}", t.delta)),
            ("beta1", format!("{:?}", t.beta1)),
            ("beta2", format!("{:?}", t.beta2)),
        ];
        for (k, v) in header {
            let _ = writeln!(out, "# {k}={v}");
        }
        for (i, l) in self.losses.iter().enumerate() {
            let _ = writeln!(out, "{i}\t{l:?}");
        }
        out
    }

    /// Smallest loss seen after the first iteration.
    pub fn made_progress(&self) -> bool {
        match self.losses.split_first() {
            Some((first, rest)) => rest.iter().any(|l| l < first),
            None => false,
        }
    }
}

/// Fits a generator to `psi` and returns the congruent unwrapped phase.
pub fn unwrap_pudip(psi: &Grid2D, gcfg: &GeneratorConfig, tcfg: &TrainConfig) -> Result<(Grid2D, RunReport)> {
    tcfg.validate()?;
    psi.ensure_finite()?;
    let start = Instant::now();
    let (h, w) = psi.shape();
    let mut gen = Generator::new(gcfg, h, w, tcfg.seed)?;
    let z = gen.prepare_input(&sample_input(tcfg.seed, gcfg.input_channels, h, w))?;
    let target = Arc::new(wrapped_gradient(psi));
    let mut adam = Adam::with_betas(tcfg.lr, tcfg.beta1, tcfg.beta2);
    let mut weights: Option<Arc<Grid2D>> = None;
    let mut losses = Vec::with_capacity(tcfg.iterations);

    for it in 0..tcfg.iterations {
        let mut g = Graph::new();
        let p = gen.params().bind(&mut g);
        let zv = g.input(z.clone());
        let out = gen.forward(&mut g, &p, zv)?;
        if it % tcfg.refresh_every == 0 {
            let phi = Grid2D::new(h, w, g.value(out).data().to_vec())?;
            weights = Some(Arc::new(weights_from_target(&phi, &target, tcfg.weight_bounds)?));
        }
        let wts = Arc::clone(weights.as_ref().expect("set at iteration 0"));
        let loss = g.apply(out, WeightedResidualLoss::new(Arc::clone(&target), wts, tcfg.delta))?;
        let value = g.value(loss).item();
        if !value.is_finite() {
            return Err(PudipError::NonFiniteLoss { iteration: it, value });
        }
        losses.push(value);
        g.backward(loss)?;
        adam.step(gen.params_mut(), &p.grads(&g))?;
    }

    let phi_hat = gen.evaluate(&sample_input(tcfg.seed, gcfg.input_channels, h, w))?;
    let phi_tilde = congruence(psi, &phi_hat)?;
    let report = RunReport {
        losses,
        phi_hat,
        phi_tilde: phi_tilde.clone(),
        seed: tcfg.seed,
        generator: *gcfg,
        train: *tcfg,
        wall_time: start.elapsed(),
    };
    Ok((phi_tilde, report))
}
