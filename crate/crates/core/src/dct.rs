//! Orthonormal type-II cosine transform, applied separably on grids.
//!
//! A dense `n x n` basis matrix per axis. At the grid sizes used here
//! (up to a few hundred pixels per side) this is fast enough and exact to
//! rounding.

use std::f64::consts::PI;

use crate::grid::Grid2D;

#[derive(Clone, Debug)]
pub struct Dct {
    n: usize,
    // basis[k * n + i] = s_k cos(pi (2i + 1) k / 2n)
    basis: Vec<f64>,
}

impl Dct {
    pub fn new(n: usize) -> Self {
        assert!(n > 0);
        let mut basis = vec![0.0; n * n];
        for k in 0..n {
            let s = if k == 0 {
                (1.0 / n as f64).sqrt()
            } else {
                (2.0 / n as f64).sqrt()
            };
            for i in 0..n {
                basis[k * n + i] = s * (PI * (2 * i + 1) as f64 * k as f64 / (2 * n) as f64).cos();
            }
        }
        Self { n, basis }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// DCT-II of a strided sequence, written to `out`.
    fn forward_strided(&self, input: &[f64], stride: usize, out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            let row = &self.basis[k * self.n..(k + 1) * self.n];
            *o = row
                .iter()
                .enumerate()
                .map(|(i, b)| b * input[i * stride])
                .sum();
        }
    }

    /// DCT-III (the inverse) of a strided sequence.
    fn inverse_strided(&self, input: &[f64], stride: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..self.n {
            let c = input[k * stride];
            let row = &self.basis[k * self.n..(k + 1) * self.n];
            for (o, b) in out.iter_mut().zip(row) {
                *o += c * b;
            }
        }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.forward_strided(x, 1, &mut out);
        out
    }

    pub fn inverse(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.inverse_strided(x, 1, &mut out);
        out
    }
}

/// Separable 2D transform pair for a fixed grid shape.
#[derive(Clone, Debug)]
pub struct Dct2 {
    rows: Dct,
    cols: Dct,
}

impl Dct2 {
    pub fn new(height: usize, width: usize) -> Self {
        Self {
            rows: Dct::new(height),
            cols: Dct::new(width),
        }
    }

    pub fn forward(&self, g: &Grid2D) -> Grid2D {
        self.apply(g, false)
    }

    pub fn inverse(&self, g: &Grid2D) -> Grid2D {
        self.apply(g, true)
    }

    fn apply(&self, g: &Grid2D, inverse: bool) -> Grid2D {
        let (h, w) = g.shape();
        assert_eq!((h, w), (self.rows.len(), self.cols.len()));
        let mut tmp = Grid2D::zeros(h, w);
        for i in 0..h {
            let out = &mut tmp.data_mut()[i * w..(i + 1) * w];
            if inverse {
                self.cols.inverse_strided(g.row(i), 1, out);
            } else {
                self.cols.forward_strided(g.row(i), 1, out);
            }
        }
        let mut result = Grid2D::zeros(h, w);
        let mut col = vec![0.0; h];
        for j in 0..w {
            if inverse {
                self.rows.inverse_strided(&tmp.data()[j..], w, &mut col);
            } else {
                self.rows.forward_strided(&tmp.data()[j..], w, &mut col);
            }
            for (i, v) in col.iter().enumerate() {
                result[(i, j)] = *v;
            }
        }
        result
    }
}
