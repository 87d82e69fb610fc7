//! The encoder-decoder generator and its fixed random input.

use phz_core::Grid2D;
use phz_nn::{BatchNorm2d, Bound, Conv2d, Graph, PRelu, ParamStore, Tensor, Var};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::GeneratorConfig;
use crate::error::{PudipError, Result};
use crate::layers::OffsetLayer;

/// Conv, batch norm, PReLU.
#[derive(Clone, Debug)]
struct Unit {
    conv: Conv2d,
    bn: BatchNorm2d,
    act: PRelu,
}

impl Unit {
    #[allow(clippy::too_many_arguments)]
    fn new(
        store: &mut ParamStore,
        rng: &mut ChaCha8Rng,
        name: &str,
        cin: usize,
        cout: usize,
        stride: usize,
    ) -> Self {
        Self {
            conv: Conv2d::new(store, rng, &format!("{name}.conv"), cin, cout, 3, stride),
            bn: BatchNorm2d::new(store, &format!("{name}.bn"), cout),
            act: PRelu::new(store, &format!("{name}.act"), cout),
        }
    }

    fn forward(&self, g: &mut Graph, p: &Bound, x: Var) -> Result<Var> {
        let y = self.conv.forward(g, p, x)?;
        let y = self.bn.forward(g, p, y)?;
        Ok(self.act.forward(g, p, y)?)
    }
}

#[derive(Clone, Debug)]
struct Level {
    skip: Conv2d,
    down: Unit,
    body: Unit,
    up_bn: BatchNorm2d,
    merge: Unit,
    refine: Unit,
}

/// Map from the fixed input to a one-channel phase estimate.
#[derive(Clone, Debug)]
pub struct Generator {
    cfg: GeneratorConfig,
    params: ParamStore,
    levels: Vec<Level>,
    head: Conv2d,
    height: usize,
    width: usize,
    padded: (usize, usize),
    offset: (usize, usize),
}

/// Maps `i` into `0..n` by mirroring about the end samples.
fn reflect(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let r = i.rem_euclid(period);
    (if r < n as isize { r } else { period - r }) as usize
}

/// Mirror-pads every channel of `t` to `height x width`, placing the
/// original at `(top, left)`.
pub fn reflect_pad(t: &Tensor, height: usize, width: usize, top: usize, left: usize) -> Tensor {
    let (c, h, w) = t.chw().expect("CxHxW input");
    let mut out = Vec::with_capacity(c * height * width);
    for ch in 0..c {
        for i in 0..height {
            let si = reflect(i as isize - top as isize, h);
            for j in 0..width {
                let sj = reflect(j as isize - left as isize, w);
                out.push(t.data()[(ch * h + si) * w + sj]);
            }
        }
    }
    Tensor::new(&[c, height, width], out).expect("sized")
}

/// i.i.d. `U(0, 0.1)` entries, `channels x height x width`.
pub fn sample_input(seed: u64, channels: usize, height: usize, width: usize) -> Tensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let data = (0..channels * height * width)
        .map(|_| rng.random_range(0.0..0.1))
        .collect();
    Tensor::new(&[channels, height, width], data).expect("sized")
}

pub fn build_generator(cfg: &GeneratorConfig, height: usize, width: usize, seed: u64) -> Result<Generator> {
    Generator::new(cfg, height, width, seed)
}

impl Generator {
    /// Parameters are drawn from a generator seeded with `seed`.
    pub fn new(cfg: &GeneratorConfig, height: usize, width: usize, seed: u64) -> Result<Self> {
        cfg.validate()?;
        if height == 0 || width == 0 {
            return Err(PudipError::Config(format!("empty frame {height}x{width}")));
        }
        let m = 1usize << cfg.stages;
        let padded = (height.div_ceil(m) * m, width.div_ceil(m) * m);
        let offset = ((padded.0 - height) / 2, (padded.1 - width) / 2);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamStore::new();
        let (body, skip) = (cfg.body_channels, cfg.skip_channels);
        let mut levels = Vec::with_capacity(cfg.stages);
        for l in 0..cfg.stages {
            let cin = if l == 0 { cfg.input_channels } else { body };
            let name = format!("level{l}");
            let p = &mut params;
            levels.push(Level {
                skip: Conv2d::new(p, &mut rng, &format!("{name}.skip"), cin, skip, 1, 1),
                down: Unit::new(p, &mut rng, &format!("{name}.down"), cin, body, 2),
                body: Unit::new(p, &mut rng, &format!("{name}.body"), body, body, 1),
                up_bn: BatchNorm2d::new(p, &format!("{name}.up_bn"), body),
                merge: Unit::new(p, &mut rng, &format!("{name}.merge"), body + skip, body, 1),
                refine: Unit::new(p, &mut rng, &format!("{name}.refine"), body, body, 1),
            });
        }
        let head = Conv2d::new(&mut params, &mut rng, "head", body, 1, 1, 1);
        Ok(Self {
            cfg: *cfg,
            params,
            levels,
            head,
            height,
            width,
            padded,
            offset,
        })
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.cfg
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    /// Internal working size, a multiple of `2^stages` per axis.
    pub fn padded_shape(&self) -> (usize, usize) {
        self.padded
    }

    pub fn output_shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    /// Pads an `input_channels x height x width` input to the working size.
    pub fn prepare_input(&self, z: &Tensor) -> Result<Tensor> {
        let (c, h, w) = z.chw()?;
        if (c, h, w) != (self.cfg.input_channels, self.height, self.width) {
            return Err(PudipError::Config(format!(
                "input must be {}x{}x{}, got {c}x{h}x{w}",
                self.cfg.input_channels, self.height, self.width
            )));
        }
        Ok(reflect_pad(z, self.padded.0, self.padded.1, self.offset.0, self.offset.1))
    }

    /// Records the network on `g`; `z` must already be padded.
    pub fn forward(&self, g: &mut Graph, p: &Bound, z: Var) -> Result<Var> {
        let mut skips = Vec::with_capacity(self.levels.len());
        let mut x = z;
        for level in &self.levels {
            skips.push(level.skip.forward(g, p, x)?);
            x = level.down.forward(g, p, x)?;
            x = level.body.forward(g, p, x)?;
        }
        for (level, skip) in self.levels.iter().zip(skips).rev() {
            x = g.upsample_bilinear_2x(x)?;
            x = level.up_bn.forward(g, p, x)?;
            x = g.concat_channels(x, skip)?;
            x = level.merge.forward(g, p, x)?;
            x = level.refine.forward(g, p, x)?;
        }
        x = self.head.forward(g, p, x)?;
        x = g.crop(x, self.offset.0, self.offset.1, self.height, self.width)?;
        Ok(g.apply(x, OffsetLayer::new(self.cfg.offset_mode))?)
    }

    /// Output map for an unpadded input, without recording gradients.
    pub fn evaluate(&self, z: &Tensor) -> Result<Grid2D> {
        let mut g = Graph::new();
        let p = self.params.bind(&mut g);
        let zv = g.input(self.prepare_input(z)?);
        let out = self.forward(&mut g, &p, zv)?;
        Ok(Grid2D::new(self.height, self.width, g.value(out).data().to_vec())?)
    }
}
