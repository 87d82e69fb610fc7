//! 2D cross-correlation through im2col and GEMM.

use std::borrow::Cow;

use crate::error::{shape_err, Result};

/// `c = alpha * op(a) * op(b) + beta * c` on row-major buffers, where `a` is
/// `m x k` (stored `k x m` when `ta`) and `b` is `k x n` (stored `n x k`
/// when `tb`).
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    ta: bool,
    b: &[f64],
    tb: bool,
    beta: f64,
    c: &mut [f64],
) {
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    let (rsa, csa) = if ta { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if tb { (1, k as isize) } else { (n as isize, 1) };
    // SAFETY: the asserts above bound every index the strides can reach.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct ConvGeom {
    pub c: usize,
    pub h: usize,
    pub w: usize,
    pub o: usize,
    pub kh: usize,
    pub kw: usize,
    pub stride: usize,
    pub pad: usize,
    pub oh: usize,
    pub ow: usize,
}

impl ConvGeom {
    pub fn new(input: &[usize], kernel: &[usize], stride: usize, pad: usize) -> Result<Self> {
        let (c, h, w) = match *input {
            [c, h, w] => (c, h, w),
            _ => return shape_err(format!("conv input must be CxHxW, got {input:?}")),
        };
        let (o, kc, kh, kw) = match *kernel {
            [o, kc, kh, kw] => (o, kc, kh, kw),
            _ => return shape_err(format!("conv kernel must be OxCxKhxKw, got {kernel:?}")),
        };
        if kc != c {
            return shape_err(format!("kernel expects {kc} input channels, input has {c}"));
        }
        if stride == 0 {
            return shape_err("stride must be positive");
        }
        if h + 2 * pad < kh || w + 2 * pad < kw {
            return shape_err(format!("kernel {kh}x{kw} larger than padded input {h}x{w}"));
        }
        Ok(Self {
            c,
            h,
            w,
            o,
            kh,
            kw,
            stride,
            pad,
            oh: (h + 2 * pad - kh) / stride + 1,
            ow: (w + 2 * pad - kw) / stride + 1,
        })
    }

    fn patch(&self) -> usize {
        self.c * self.kh * self.kw
    }

    fn positions(&self) -> usize {
        self.oh * self.ow
    }

    fn is_pointwise(&self) -> bool {
        self.kh == 1 && self.kw == 1 && self.stride == 1 && self.pad == 0
    }

    /// Input column feeding output column `ox` through kernel column `kx`.
    #[inline]
    fn source(&self, out: usize, k: usize, limit: usize) -> Option<usize> {
        let s = (out * self.stride + k) as isize - self.pad as isize;
        (s >= 0 && (s as usize) < limit).then_some(s as usize)
    }
}

fn im2col<'a>(x: &'a [f64], g: &ConvGeom) -> Cow<'a, [f64]> {
    if g.is_pointwise() {
        return Cow::Borrowed(x);
    }
    let p = g.positions();
    let mut cols = vec![0.0; g.patch() * p];
    for ci in 0..g.c {
        let plane = &x[ci * g.h * g.w..(ci + 1) * g.h * g.w];
        for ky in 0..g.kh {
            for kx in 0..g.kw {
                let row = (ci * g.kh + ky) * g.kw + kx;
                let dst = &mut cols[row * p..(row + 1) * p];
                for oy in 0..g.oh {
                    let Some(iy) = g.source(oy, ky, g.h) else { continue };
                    let src = &plane[iy * g.w..(iy + 1) * g.w];
                    let line = &mut dst[oy * g.ow..(oy + 1) * g.ow];
                    for (ox, v) in line.iter_mut().enumerate() {
                        if let Some(ix) = g.source(ox, kx, g.w) {
                            *v = src[ix];
                        }
                    }
                }
            }
        }
    }
    Cow::Owned(cols)
}

fn col2im_add(cols: &[f64], g: &ConvGeom, dx: &mut [f64]) {
    let p = g.positions();
    for ci in 0..g.c {
        let plane = &mut dx[ci * g.h * g.w..(ci + 1) * g.h * g.w];
        for ky in 0..g.kh {
            for kx in 0..g.kw {
                let row = (ci * g.kh + ky) * g.kw + kx;
                let src = &cols[row * p..(row + 1) * p];
                for oy in 0..g.oh {
                    let Some(iy) = g.source(oy, ky, g.h) else { continue };
                    let line = &src[oy * g.ow..(oy + 1) * g.ow];
                    let dst = &mut plane[iy * g.w..(iy + 1) * g.w];
                    for (ox, v) in line.iter().enumerate() {
                        if let Some(ix) = g.source(ox, kx, g.w) {
                            dst[ix] += v;
                        }
                    }
                }
            }
        }
    }
}

pub(crate) fn forward(x: &[f64], kernel: &[f64], bias: Option<&[f64]>, g: &ConvGeom) -> Vec<f64> {
    let p = g.positions();
    let mut out = vec![0.0; g.o * p];
    if let Some(b) = bias {
        for (chunk, &bv) in out.chunks_mut(p).zip(b) {
            chunk.fill(bv);
        }
    }
    let cols = im2col(x, g);
    gemm(g.o, g.patch(), p, kernel, false, &cols, false, 1.0, &mut out);
    out
}

pub(crate) struct ConvGrads {
    pub input: Option<Vec<f64>>,
    pub kernel: Option<Vec<f64>>,
    pub bias: Option<Vec<f64>>,
}

pub(crate) fn backward(
    x: &[f64],
    kernel: &[f64],
    dy: &[f64],
    g: &ConvGeom,
    need: [bool; 3],
) -> ConvGrads {
    let p = g.positions();
    let kernel_grad = need[1].then(|| {
        let cols = im2col(x, g);
        let mut dk = vec![0.0; g.o * g.patch()];
        gemm(g.o, p, g.patch(), dy, false, &cols, true, 0.0, &mut dk);
        dk
    });
    let input_grad = need[0].then(|| {
        let mut dcols = vec![0.0; g.patch() * p];
        gemm(g.patch(), g.o, p, kernel, true, dy, false, 0.0, &mut dcols);
        if g.is_pointwise() {
            dcols
        } else {
            let mut dx = vec![0.0; g.c * g.h * g.w];
            col2im_add(&dcols, g, &mut dx);
            dx
        }
    });
    let bias_grad = need[2].then(|| dy.chunks(p).map(|c| c.iter().sum()).collect());
    ConvGrads {
        input: input_grad,
        kernel: kernel_grad,
        bias: bias_grad,
    }
}
