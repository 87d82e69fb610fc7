//! Tape-based reverse-mode differentiation.
//!
//! A [`Graph`] records every operation as a node in creation order, so the
//! node list is already topologically sorted. Build a fresh graph for each
//! forward pass.

use crate::conv::{self, ConvGeom};
use crate::error::{shape_err, NnError, Result};
use crate::norm::{self, BnCache};
use crate::resample;
use crate::tensor::Tensor;

/// Handle to a node of a [`Graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A user-defined differentiable map of a single tensor.
pub trait Function {
    fn forward(&mut self, input: &Tensor) -> Result<Tensor>;

    /// Gradient with respect to `input`, given the gradient of the output.
    fn backward(&self, input: &Tensor, output: &Tensor, grad_output: &[f64]) -> Vec<f64>;
}

enum Op {
    Leaf,
    Conv {
        x: Var,
        k: Var,
        b: Option<Var>,
        geom: ConvGeom,
    },
    BatchNorm {
        x: Var,
        gamma: Var,
        beta: Var,
        cache: BnCache,
    },
    Prelu {
        x: Var,
        alpha: Var,
    },
    Upsample {
        x: Var,
    },
    Concat {
        a: Var,
        b: Var,
    },
    Crop {
        x: Var,
        top: usize,
        left: usize,
    },
    Add(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Sum(Var),
    Custom {
        x: Var,
        f: Box<dyn Function + Send>,
    },
}

struct Node {
    value: Tensor,
    grad: Option<Vec<f64>>,
    requires_grad: bool,
    op: Op,
}

#[derive(Default)]
pub struct Graph {
    nodes: Vec<Node>,
    backward_done: bool,
}

fn add_into(dst: &mut Option<Vec<f64>>, src: Vec<f64>) {
    match dst {
        Some(d) => d.iter_mut().zip(&src).for_each(|(a, b)| *a += b),
        None => *dst = Some(src),
    }
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op, inputs: &[Var]) -> Var {
        let requires_grad = inputs.iter().any(|v| self.nodes[v.0].requires_grad);
        self.nodes.push(Node {
            value,
            grad: None,
            requires_grad,
            op,
        });
        Var(self.nodes.len() - 1)
    }

    /// A constant leaf.
    pub fn input(&mut self, value: Tensor) -> Var {
        self.leaf(value, false)
    }

    /// A leaf whose gradient is collected by [`Graph::backward`].
    pub fn param(&mut self, value: Tensor) -> Var {
        self.leaf(value, true)
    }

    fn leaf(&mut self, value: Tensor, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            grad: None,
            requires_grad,
            op: Op::Leaf,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn grad(&self, v: Var) -> Option<&[f64]> {
        self.nodes[v.0].grad.as_deref()
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// Zero-padded cross-correlation; `bias` has one entry per output channel.
    pub fn conv2d(&mut self, x: Var, k: Var, b: Option<Var>, stride: usize, padding: usize) -> Result<Var> {
        let geom = ConvGeom::new(self.value(x).shape(), self.value(k).shape(), stride, padding)?;
        if let Some(b) = b {
            if self.value(b).len() != geom.o {
                return shape_err(format!(
                    "bias has {} entries for {} output channels",
                    self.value(b).len(),
                    geom.o
                ));
            }
        }
        let out = conv::forward(
            self.value(x).data(),
            self.value(k).data(),
            b.map(|b| self.value(b).data()),
            &geom,
        );
        let value = Tensor::new(&[geom.o, geom.oh, geom.ow], out)?;
        let mut inputs = vec![x, k];
        inputs.extend(b);
        Ok(self.push(value, Op::Conv { x, k, b, geom }, &inputs))
    }

    /// Normalizes each channel over its spatial positions.
    pub fn batch_norm(&mut self, x: Var, gamma: Var, beta: Var, eps: f64) -> Result<Var> {
        let (c, _, _) = self.value(x).chw()?;
        if self.value(gamma).len() != c || self.value(beta).len() != c {
            return shape_err(format!("batch norm over {c} channels needs {c} gamma/beta entries"));
        }
        let (y, cache) = norm::forward(
            self.value(x).data(),
            c,
            self.value(gamma).data(),
            self.value(beta).data(),
            eps,
        );
        let value = Tensor::new(self.value(x).shape(), y)?;
        Ok(self.push(value, Op::BatchNorm { x, gamma, beta, cache }, &[x, gamma, beta]))
    }

    /// `x` where `x >= 0`, otherwise `alpha[c] * x`.
    pub fn prelu(&mut self, x: Var, alpha: Var) -> Result<Var> {
        let (c, h, w) = self.value(x).chw()?;
        if self.value(alpha).len() != c {
            return shape_err(format!("prelu over {c} channels needs {c} slopes"));
        }
        let n = h * w;
        let a = self.value(alpha).data();
        let y = self
            .value(x)
            .data()
            .iter()
            .enumerate()
            .map(|(i, &v)| if v >= 0.0 { v } else { a[i / n] * v })
            .collect();
        let value = Tensor::new(self.value(x).shape(), y)?;
        Ok(self.push(value, Op::Prelu { x, alpha }, &[x, alpha]))
    }

    pub fn upsample_bilinear_2x(&mut self, x: Var) -> Result<Var> {
        let (c, h, w) = self.value(x).chw()?;
        let y = resample::forward(self.value(x).data(), c, h, w);
        let value = Tensor::new(&[c, 2 * h, 2 * w], y)?;
        Ok(self.push(value, Op::Upsample { x }, &[x]))
    }

    /// Channels of `a` followed by channels of `b`.
    pub fn concat_channels(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ca, ha, wa) = self.value(a).chw()?;
        let (cb, hb, wb) = self.value(b).chw()?;
        if (ha, wa) != (hb, wb) {
            return shape_err(format!("concat of {ha}x{wa} and {hb}x{wb} maps"));
        }
        let mut data = Vec::with_capacity((ca + cb) * ha * wa);
        data.extend_from_slice(self.value(a).data());
        data.extend_from_slice(self.value(b).data());
        let value = Tensor::new(&[ca + cb, ha, wa], data)?;
        Ok(self.push(value, Op::Concat { a, b }, &[a, b]))
    }

    /// The `height x width` window starting at `(top, left)` of every channel.
    pub fn crop(&mut self, x: Var, top: usize, left: usize, height: usize, width: usize) -> Result<Var> {
        let (c, h, w) = self.value(x).chw()?;
        if top + height > h || left + width > w {
            return shape_err(format!(
                "crop {height}x{width} at ({top}, {left}) exceeds {h}x{w}"
            ));
        }
        let src = self.value(x).data();
        let mut data = Vec::with_capacity(c * height * width);
        for ch in 0..c {
            for i in top..top + height {
                let start = (ch * h + i) * w + left;
                data.extend_from_slice(&src[start..start + width]);
            }
        }
        let value = Tensor::new(&[c, height, width], data)?;
        Ok(self.push(value, Op::Crop { x, top, left }, &[x]))
    }

    fn same_shape(&self, a: Var, b: Var) -> Result<()> {
        if self.value(a).shape() != self.value(b).shape() {
            return shape_err(format!(
                "elementwise op on {:?} and {:?}",
                self.value(a).shape(),
                self.value(b).shape()
            ));
        }
        Ok(())
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape(a, b)?;
        let y = self.value(a).data().iter().zip(self.value(b).data()).map(|(x, y)| x + y).collect();
        let value = Tensor::new(self.value(a).shape(), y)?;
        Ok(self.push(value, Op::Add(a, b), &[a, b]))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape(a, b)?;
        let y = self.value(a).data().iter().zip(self.value(b).data()).map(|(x, y)| x * y).collect();
        let value = Tensor::new(self.value(a).shape(), y)?;
        Ok(self.push(value, Op::Mul(a, b), &[a, b]))
    }

    pub fn scale(&mut self, x: Var, factor: f64) -> Var {
        let y = self.value(x).data().iter().map(|v| v * factor).collect();
        let value = Tensor::new(self.value(x).shape(), y).expect("shape preserved");
        self.push(value, Op::Scale(x, factor), &[x])
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let value = Tensor::scalar(self.value(x).data().iter().sum());
        self.push(value, Op::Sum(x), &[x])
    }

    pub fn apply(&mut self, x: Var, mut f: impl Function + Send + 'static) -> Result<Var> {
        let value = f.forward(self.value(x))?;
        Ok(self.push(value, Op::Custom { x, f: Box::new(f) }, &[x]))
    }

    /// Clears every gradient so that [`Graph::backward`] may run again.
    pub fn reset_grads(&mut self) {
        self.nodes.iter_mut().for_each(|n| n.grad = None);
        self.backward_done = false;
    }

    /// Accumulates `d loss / d v` into every node that requires a gradient.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        if self.backward_done {
            return Err(NnError::BackwardTwice);
        }
        if self.value(loss).len() != 1 {
            return Err(NnError::NotScalar(self.value(loss).shape().to_vec()));
        }
        self.backward_done = true;
        if !self.nodes[loss.0].requires_grad {
            return Ok(());
        }
        self.nodes[loss.0].grad = Some(vec![1.0]);
        for i in (0..=loss.0).rev() {
            let (before, rest) = self.nodes.split_at_mut(i);
            let node = &rest[0];
            let Some(dy) = node.grad.as_deref() else { continue };
            if !node.requires_grad {
                continue;
            }
            backprop(before, node, dy)?;
        }
        Ok(())
    }
}

fn backprop(before: &mut [Node], node: &Node, dy: &[f64]) -> Result<()> {
    let needs = |v: &Var, nodes: &[Node]| nodes[v.0].requires_grad;
    match &node.op {
        Op::Leaf => {}
        Op::Conv { x, k, b, geom } => {
            let need = [needs(x, before), needs(k, before), b.is_some_and(|b| needs(&b, before))];
            let g = conv::backward(before[x.0].value.data(), before[k.0].value.data(), dy, geom, need);
            if let Some(dx) = g.input {
                add_into(&mut before[x.0].grad, dx);
            }
            if let Some(dk) = g.kernel {
                add_into(&mut before[k.0].grad, dk);
            }
            if let (Some(b), Some(db)) = (b, g.bias) {
                add_into(&mut before[b.0].grad, db);
            }
        }
        Op::BatchNorm { x, gamma, beta, cache } => {
            let c = before[gamma.0].value.len();
            let (dx, dg, db) = norm::backward(dy, c, before[gamma.0].value.data(), cache);
            for (v, g) in [(x, dx), (gamma, dg), (beta, db)] {
                if needs(v, before) {
                    add_into(&mut before[v.0].grad, g);
                }
            }
        }
        Op::Prelu { x, alpha } => {
            let xs = before[x.0].value.data();
            let a = before[alpha.0].value.data();
            let n = xs.len() / a.len().max(1);
            if needs(alpha, before) {
                let mut da = vec![0.0; a.len()];
                for (i, (&v, &g)) in xs.iter().zip(dy).enumerate() {
                    if v < 0.0 {
                        da[i / n] += v * g;
                    }
                }
                add_into(&mut before[alpha.0].grad, da);
            }
            if needs(x, before) {
                let dx = xs
                    .iter()
                    .zip(dy)
                    .enumerate()
                    .map(|(i, (&v, &g))| if v >= 0.0 { g } else { a[i / n] * g })
                    .collect();
                add_into(&mut before[x.0].grad, dx);
            }
        }
        Op::Upsample { x } => {
            if needs(x, before) {
                let (c, h, w) = before[x.0].value.chw()?;
                add_into(&mut before[x.0].grad, resample::backward(dy, c, h, w));
            }
        }
        Op::Concat { a, b } => {
            let split = before[a.0].value.len();
            if needs(a, before) {
                add_into(&mut before[a.0].grad, dy[..split].to_vec());
            }
            if needs(b, before) {
                add_into(&mut before[b.0].grad, dy[split..].to_vec());
            }
        }
        Op::Crop { x, top, left } => {
            if needs(x, before) {
                let (c, h, w) = before[x.0].value.chw()?;
                let (_, ch, cw) = node.value.chw()?;
                let mut dx = vec![0.0; c * h * w];
                for k in 0..c {
                    for i in 0..ch {
                        let dst = (k * h + top + i) * w + left;
                        let src = (k * ch + i) * cw;
                        dx[dst..dst + cw].copy_from_slice(&dy[src..src + cw]);
                    }
                }
                add_into(&mut before[x.0].grad, dx);
            }
        }
        Op::Add(a, b) => {
            for v in [a, b] {
                if needs(v, before) {
                    add_into(&mut before[v.0].grad, dy.to_vec());
                }
            }
        }
        Op::Mul(a, b) => {
            let da: Vec<f64> = dy.iter().zip(before[b.0].value.data()).map(|(g, y)| g * y).collect();
            let db: Vec<f64> = dy.iter().zip(before[a.0].value.data()).map(|(g, x)| g * x).collect();
            if needs(a, before) {
                add_into(&mut before[a.0].grad, da);
            }
            if needs(b, before) {
                add_into(&mut before[b.0].grad, db);
            }
        }
        Op::Scale(x, f) => {
            if needs(x, before) {
                add_into(&mut before[x.0].grad, dy.iter().map(|g| g * f).collect());
            }
        }
        Op::Sum(x) => {
            if needs(x, before) {
                add_into(&mut before[x.0].grad, vec![dy[0]; before[x.0].value.len()]);
            }
        }
        Op::Custom { x, f } => {
            if needs(x, before) {
                let dx = f.backward(&before[x.0].value, &node.value, dy);
                if dx.len() != before[x.0].value.len() {
                    return shape_err(format!(
                        "custom backward returned {} values for an input of {}",
                        dx.len(),
                        before[x.0].value.len()
                    ));
                }
                add_into(&mut before[x.0].grad, dx);
            }
        }
    }
    Ok(())
}
