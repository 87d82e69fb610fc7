//! Parameter storage and the layers used by the generator.

use rand::Rng;

use crate::error::Result;
use crate::graph::{Graph, Var};
use crate::tensor::Tensor;

pub const BN_EPS: f64 = 1e-5;
pub const PRELU_INIT: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParamId(usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Named trainable tensors, in registration order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamStore {
    names: Vec<String>,
    values: Vec<Tensor>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Tensor) -> ParamId {
        self.names.push(name.into());
        self.values.push(value);
        ParamId(self.values.len() - 1)
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.values[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.values[id.0]
    }

    pub fn find(&self, name: &str) -> Option<ParamId> {
        self.names.iter().position(|n| n == name).map(ParamId)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Total number of scalars.
    pub fn numel(&self) -> usize {
        self.values.iter().map(Tensor::len).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.names.iter().map(String::as_str).zip(&self.values)
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Tensor] {
        &mut self.values
    }

    /// Copies every parameter into `graph` as a gradient-tracking leaf.
    pub fn bind(&self, graph: &mut Graph) -> Bound {
        Bound(self.values.iter().map(|t| graph.param(t.clone())).collect())
    }
}

/// Graph handles of a bound [`ParamStore`].
#[derive(Clone, Debug)]
pub struct Bound(Vec<Var>);

impl Bound {
    pub fn var(&self, id: ParamId) -> Var {
        self.0[id.0]
    }

    /// Gradients in parameter order; parameters that did not influence the
    /// loss get zeros.
    pub fn grads(&self, graph: &Graph) -> Vec<Vec<f64>> {
        self.0
            .iter()
            .map(|&v| match graph.grad(v) {
                Some(g) => g.to_vec(),
                None => vec![0.0; graph.value(v).len()],
            })
            .collect()
    }
}

/// Square-kernel convolution with `padding = kernel / 2`.
#[derive(Clone, Copy, Debug)]
pub struct Conv2d {
    pub kernel: ParamId,
    pub bias: ParamId,
    pub stride: usize,
    pub padding: usize,
}

impl Conv2d {
    /// Kernel entries uniform in `±1/sqrt(fan_in)`, zero bias.
    pub fn new(
        store: &mut ParamStore,
        rng: &mut impl Rng,
        name: &str,
        in_channels: usize,
        out_channels: usize,
        kernel_size: usize,
        stride: usize,
    ) -> Self {
        let fan_in = in_channels * kernel_size * kernel_size;
        let bound = 1.0 / (fan_in as f64).sqrt();
        let data = (0..out_channels * fan_in)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        let shape = [out_channels, in_channels, kernel_size, kernel_size];
        let kernel = store.add(format!("{name}.weight"), Tensor::new(&shape, data).expect("sized"));
        let bias = store.add(format!("{name}.bias"), Tensor::zeros(&[out_channels]));
        Self {
            kernel,
            bias,
            stride,
            padding: kernel_size / 2,
        }
    }

    pub fn forward(&self, g: &mut Graph, p: &Bound, x: Var) -> Result<Var> {
        g.conv2d(x, p.var(self.kernel), Some(p.var(self.bias)), self.stride, self.padding)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BatchNorm2d {
    pub gamma: ParamId,
    pub beta: ParamId,
}

impl BatchNorm2d {
    pub fn new(store: &mut ParamStore, name: &str, channels: usize) -> Self {
        Self {
            gamma: store.add(format!("{name}.gamma"), Tensor::filled(&[channels], 1.0)),
            beta: store.add(format!("{name}.beta"), Tensor::zeros(&[channels])),
        }
    }

    pub fn forward(&self, g: &mut Graph, p: &Bound, x: Var) -> Result<Var> {
        g.batch_norm(x, p.var(self.gamma), p.var(self.beta), BN_EPS)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PRelu {
    pub alpha: ParamId,
}

impl PRelu {
    pub fn new(store: &mut ParamStore, name: &str, channels: usize) -> Self {
        Self {
            alpha: store.add(format!("{name}.alpha"), Tensor::filled(&[channels], PRELU_INIT)),
        }
    }

    pub fn forward(&self, g: &mut Graph, p: &Bound, x: Var) -> Result<Var> {
        g.prelu(x, p.var(self.alpha))
    }
}
