//! Unweighted least-squares unwrapping through the Neumann Poisson equation.
//!
//! Minimizes `||Δφ - W(Δψ)||²`. The normal equations `ΔᵀΔ φ = Δᵀ W(Δψ)`
//! are diagonal in the type-II cosine basis, with eigenvalues
//! `(2 - 2cos(πk/H)) + (2 - 2cos(πl/W))`.

use std::f64::consts::PI;

use super::itoh::unwrap_itoh_1d;
use crate::dct::Dct2;
use crate::grid::Grid2D;
use crate::phase::{congruence, gradient_adjoint, wrapped_gradient};

/// Solves `ΔᵀΔ φ = rhs` for mean-zero `φ`.
#[derive(Clone, Debug)]
pub struct PoissonSolver {
    dct: Dct2,
    eigenvalues: Grid2D,
}

impl PoissonSolver {
    pub fn new(height: usize, width: usize) -> Self {
        let eig = |k: usize, n: usize| 2.0 - 2.0 * (PI * k as f64 / n as f64).cos();
        Self {
            dct: Dct2::new(height, width),
            eigenvalues: Grid2D::from_fn(height, width, |k, l| eig(k, height) + eig(l, width)),
        }
    }

    /// The component of `rhs` along constants is discarded.
    pub fn solve(&self, rhs: &Grid2D) -> Grid2D {
        let mut spectrum = self.dct.forward(rhs);
        for (v, &lambda) in spectrum.data_mut().iter_mut().zip(self.eigenvalues.data()) {
            *v = if lambda > 0.0 { *v / lambda } else { 0.0 };
        }
        spectrum.data_mut()[0] = 0.0;
        self.dct.inverse(&spectrum)
    }
}

/// The mean-zero least-squares solution before congruence is enforced.
///
/// Single-row and single-column inputs fall back to 1D path integration,
/// which is the exact minimizer there.
pub fn ls_solution(psi: &Grid2D) -> Grid2D {
    let (h, w) = psi.shape();
    if h == 1 || w == 1 {
        let line = unwrap_itoh_1d(psi.data());
        let mean = line.iter().sum::<f64>() / line.len() as f64;
        return Grid2D::new(h, w, line.into_iter().map(|v| v - mean).collect())
            .expect("shape preserved");
    }
    let rhs = gradient_adjoint(&wrapped_gradient(psi));
    PoissonSolver::new(h, w).solve(&rhs)
}

/// Least-squares unwrapping followed by the congruence step.
pub fn unwrap_ls_dct(psi: &Grid2D) -> Grid2D {
    congruence(psi, &ls_solution(psi)).expect("shape preserved")
}
