//! Direct iteratively reweighted least-squares minimizer of the weighted
//! gradient-mismatch energy `Σ w_n ||[Δφ - W(Δψ)]_n||`.
//!
//! Each round freezes the clamped weights `w_n` computed from the current
//! estimate and minimizes the quadratic surrogate `Σ w_n ||[Δφ - W(Δψ)]_n||²`
//! with conjugate gradients on `Δᵀ diag(w) Δ`, preconditioned by the
//! unweighted Poisson solver. No regularizer is applied.

use super::ls::{ls_solution, PoissonSolver};
use crate::error::{Error, Result};
use crate::grid::Grid2D;
use crate::phase::{
    congruence, forward_gradient, gradient_adjoint, weights_from_target, wrapped_gradient,
    GradientField, WeightBounds,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IrlsConfig {
    pub bounds: WeightBounds,
    pub outer_iters: usize,
    pub cg_iters: usize,
    pub cg_tol: f64,
}

impl IrlsConfig {
    pub fn new(bounds: WeightBounds, outer_iters: usize, cg_iters: usize, cg_tol: f64) -> Result<Self> {
        let cfg = Self {
            bounds,
            outer_iters,
            cg_iters,
            cg_tol,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.outer_iters == 0 || self.cg_iters == 0 {
            return Err(Error::InvalidParameter(
                "IRLS iteration counts must be positive".into(),
            ));
        }
        if self.cg_tol.is_nan() || self.cg_tol <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "cg_tol must be positive, got {}",
                self.cg_tol
            )));
        }
        Ok(())
    }
}

impl Default for IrlsConfig {
    fn default() -> Self {
        Self {
            bounds: WeightBounds::new(0.1, 8.0).expect("valid bounds"),
            outer_iters: 10,
            cg_iters: 200,
            cg_tol: 1e-10,
        }
    }
}

/// Diagnostics for one reweighting round.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RoundStats {
    pub cg_iterations: usize,
    pub converged: bool,
    pub relative_residual: f64,
    /// Frozen-weight quadratic objective, before the first and after every
    /// CG iteration.
    pub quadratic_trace: Vec<f64>,
    /// Unsquared weighted energy at the end of the round, using the round's weights.
    pub energy: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IrlsReport {
    pub rounds: Vec<RoundStats>,
}

impl IrlsReport {
    /// True when every CG solve reached `cg_tol`.
    pub fn converged(&self) -> bool {
        self.rounds.iter().all(|r| r.converged)
    }
}

struct WeightedLaplacian<'a> {
    weights: &'a Grid2D,
}

impl WeightedLaplacian<'_> {
    fn weigh(&self, field: &GradientField) -> GradientField {
        let w = self.weights;
        GradientField {
            gx: field.gx.zip_map(w, |g, w| g * w).expect("same shape"),
            gy: field.gy.zip_map(w, |g, w| g * w).expect("same shape"),
        }
    }

    fn apply(&self, x: &Grid2D) -> Grid2D {
        gradient_adjoint(&self.weigh(&forward_gradient(x)))
    }

    fn objective(&self, x: &Grid2D, target: &GradientField) -> f64 {
        let g = forward_gradient(x);
        let mut acc = 0.0;
        for n in 0..x.len() {
            let dx = g.gx.data()[n] - target.gx.data()[n];
            let dy = g.gy.data()[n] - target.gy.data()[n];
            acc += self.weights.data()[n] * (dx * dx + dy * dy);
        }
        acc
    }
}

fn dot(a: &Grid2D, b: &Grid2D) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut Grid2D, alpha: f64, x: &Grid2D) {
    for (y, x) in y.data_mut().iter_mut().zip(x.data()) {
        *y += alpha * x;
    }
}

/// Preconditioned CG on the frozen-weight normal equations, warm-started at `x`.
fn solve_round(
    x: &mut Grid2D,
    target: &GradientField,
    weights: &Grid2D,
    precond: &PoissonSolver,
    cfg: &IrlsConfig,
) -> RoundStats {
    let op = WeightedLaplacian { weights };
    let b = gradient_adjoint(&op.weigh(target));
    let b_norm = b.norm_l2();
    let mut stats = RoundStats {
        quadratic_trace: vec![op.objective(x, target)],
        ..RoundStats::default()
    };

    let mut r = b.zip_map(&op.apply(x), |b, ax| b - ax).expect("same shape");
    let rel = |r: &Grid2D| if b_norm > 0.0 { r.norm_l2() / b_norm } else { 0.0 };
    stats.relative_residual = rel(&r);
    if stats.relative_residual < cfg.cg_tol {
        stats.converged = true;
        return stats;
    }
    let mut z = precond.solve(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=cfg.cg_iters {
        let ap = op.apply(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        axpy(x, alpha, &p);
        axpy(&mut r, -alpha, &ap);
        stats.cg_iterations = it;
        stats.quadratic_trace.push(op.objective(x, target));
        stats.relative_residual = rel(&r);
        if stats.relative_residual < cfg.cg_tol {
            stats.converged = true;
            break;
        }
        z = precond.solve(&r);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for (p, z) in p.data_mut().iter_mut().zip(z.data()) {
            *p = z + beta * *p;
        }
    }
    stats
}

/// Returns the congruent estimate and per-round diagnostics.
///
/// A round whose CG solve does not reach `cg_tol` keeps its last iterate and
/// is flagged in the report.
pub fn unwrap_irls(psi: &Grid2D, cfg: &IrlsConfig) -> Result<(Grid2D, IrlsReport)> {
    cfg.validate()?;
    psi.ensure_finite()?;
    let (h, w) = psi.shape();
    let target = wrapped_gradient(psi);
    let precond = PoissonSolver::new(h, w);
    let mut x = ls_solution(psi);
    let mut report = IrlsReport::default();
    for _ in 0..cfg.outer_iters {
        let weights = weights_from_target(&x, &target, cfg.bounds)?;
        let mut stats = solve_round(&mut x, &target, &weights, &precond, cfg);
        stats.energy = crate::phase::residual_norms(&x, &target)?
            .data()
            .iter()
            .zip(weights.data())
            .map(|(e, w)| e * w)
            .sum();
        report.rounds.push(stats);
    }
    Ok((congruence(psi, &x)?, report))
}
