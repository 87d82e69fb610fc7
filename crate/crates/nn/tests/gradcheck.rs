use phz_nn::{Adam, Function, Graph, ParamStore, Result, Tensor, Var};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-4;
const SEEDS: u64 = 20;

fn random(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

/// Builds `Σ r ⊙ op(inputs)` with a fixed random projection `r`.
type Build = dyn Fn(&mut Graph, &[Var]) -> Var;

fn projected_loss(inputs: &[Tensor], build: &Build, projection_seed: u64) -> (Graph, Vec<Var>, Var) {
    let mut g = Graph::new();
    let vars: Vec<Var> = inputs.iter().map(|t| g.param(t.clone())).collect();
    let out = build(&mut g, &vars);
    let shape = g.value(out).shape().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(projection_seed);
    let r = g.input(random(&mut rng, &shape));
    let prod = g.mul(out, r).unwrap();
    let loss = g.sum(prod);
    (g, vars, loss)
}

fn check(name: &str, inputs: Vec<Tensor>, build: &Build, seed: u64) {
    let (mut g, vars, loss) = projected_loss(&inputs, build, seed ^ 0xABCD);
    g.backward(loss).unwrap();
    for (k, var) in vars.iter().enumerate() {
        let analytic = g.grad(*var).map(<[f64]>::to_vec).unwrap_or(vec![0.0; inputs[k].len()]);
        for (i, &a) in analytic.iter().enumerate() {
            let eval = |delta: f64| {
                let mut shifted = inputs.clone();
                shifted[k].data_mut()[i] += delta;
                let (g, _, loss) = projected_loss(&shifted, build, seed ^ 0xABCD);
                g.value(loss).item()
            };
            let numeric = (eval(STEP) - eval(-STEP)) / (2.0 * STEP);
            let tol = (1e-3 * a.abs().max(numeric.abs())).max(1e-6);
            assert!(
                (a - numeric).abs() <= tol,
                "{name}, seed {seed}, input {k}, entry {i}: analytic {a} vs numeric {numeric}"
            );
        }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn conv3x3_gradients() {
    for seed in 0..SEEDS {
        let mut r = rng(seed);
        let stride = 1 + (seed as usize % 2);
        let inputs = vec![random(&mut r, &[2, 5, 6]), random(&mut r, &[3, 2, 3, 3]), random(&mut r, &[3])];
        let build = move |g: &mut Graph, v: &[Var]| g.conv2d(v[0], v[1], Some(v[2]), stride, 1).unwrap();
        check("conv3x3", inputs, &build, seed);
    }
}

#[test]
fn conv1x1_gradients() {
    for seed in 0..SEEDS {
        let mut r = rng(100 + seed);
        let inputs = vec![random(&mut r, &[3, 4, 3]), random(&mut r, &[2, 3, 1, 1]), random(&mut r, &[2])];
        let build = |g: &mut Graph, v: &[Var]| g.conv2d(v[0], v[1], Some(v[2]), 1, 0).unwrap();
        check("conv1x1", inputs, &build, seed);
    }
}

#[test]
fn batch_norm_gradients() {
    for seed in 0..SEEDS {
        let mut r = rng(200 + seed);
        let inputs = vec![random(&mut r, &[2, 3, 4]), random(&mut r, &[2]), random(&mut r, &[2])];
        let build = |g: &mut Graph, v: &[Var]| g.batch_norm(v[0], v[1], v[2], 1e-5).unwrap();
        check("batch_norm", inputs, &build, seed);
    }
}

#[test]
fn prelu_gradients() {
    for seed in 0..SEEDS {
        let mut r = rng(300 + seed);
        let mut x = random(&mut r, &[3, 3, 3]);
        // keep entries away from the kink so that central differences are exact
        x.data_mut().iter_mut().for_each(|v| *v += v.signum() * 0.01);
        let inputs = vec![x, random(&mut r, &[3])];
        let build = |g: &mut Graph, v: &[Var]| g.prelu(v[0], v[1]).unwrap();
        check("prelu", inputs, &build, seed);
    }
}

#[test]
fn upsample_gradients() {
    for seed in 0..SEEDS {
        let mut r = rng(400 + seed);
        let h = 1 + seed as usize % 3;
        let inputs = vec![random(&mut r, &[2, h, 3])];
        let build = |g: &mut Graph, v: &[Var]| g.upsample_bilinear_2x(v[0]).unwrap();
        check("upsample", inputs, &build, seed);
    }
}

#[test]
fn concat_crop_add_scale_gradients() {
    for seed in 0..SEEDS {
        let mut r = rng(500 + seed);
        let inputs = vec![random(&mut r, &[1, 4, 5]), random(&mut r, &[2, 4, 5])];
        let build = |g: &mut Graph, v: &[Var]| {
            let c = g.concat_channels(v[0], v[1]).unwrap();
            let cropped = g.crop(c, 1, 1, 2, 3).unwrap();
            let twice = g.scale(cropped, 2.0);
            g.add(twice, cropped).unwrap()
        };
        check("concat/crop", inputs, &build, seed);
    }
}

struct Cube;

impl Function for Cube {
    fn forward(&mut self, input: &Tensor) -> Result<Tensor> {
        Tensor::new(input.shape(), input.data().iter().map(|v| v * v * v).collect())
    }

    fn backward(&self, input: &Tensor, _output: &Tensor, grad_output: &[f64]) -> Vec<f64> {
        input.data().iter().zip(grad_output).map(|(x, g)| 3.0 * x * x * g).collect()
    }
}

#[test]
fn custom_function_gradients() {
    for seed in 0..SEEDS {
        let mut r = rng(600 + seed);
        let inputs = vec![random(&mut r, &[1, 3, 3])];
        let build = |g: &mut Graph, v: &[Var]| g.apply(v[0], Cube).unwrap();
        check("custom", inputs, &build, seed);
    }
}

#[test]
fn stacked_block_gradients() {
    // one encoder step and one decoder step, as in the generator
    for seed in 0..SEEDS {
        let mut r = rng(700 + seed);
        let inputs = vec![
            random(&mut r, &[2, 4, 4]),
            random(&mut r, &[3, 2, 3, 3]),
            random(&mut r, &[3]),
            random(&mut r, &[3]),
            random(&mut r, &[3]),
        ];
        let build = |g: &mut Graph, v: &[Var]| {
            let down = g.conv2d(v[0], v[1], None, 2, 1).unwrap();
            let bn = g.batch_norm(down, v[2], v[3], 1e-5).unwrap();
            let act = g.prelu(bn, v[4]).unwrap();
            g.upsample_bilinear_2x(act).unwrap()
        };
        check("block", inputs, &build, seed);
    }
}

#[test]
fn down_then_up_restores_shape() {
    let mut g = Graph::new();
    for (h, w) in [(8, 8), (16, 6), (2, 4)] {
        let x = g.input(Tensor::zeros(&[3, h, w]));
        let k = g.input(Tensor::zeros(&[5, 3, 3, 3]));
        let down = g.conv2d(x, k, None, 2, 1).unwrap();
        assert_eq!(g.value(down).shape(), &[5, h / 2, w / 2]);
        let up = g.upsample_bilinear_2x(down).unwrap();
        assert_eq!(g.value(up).shape(), &[5, h, w]);
    }
}

#[test]
fn batch_norm_output_statistics() {
    for seed in 0..SEEDS {
        let mut r = rng(800 + seed);
        let mut g = Graph::new();
        let x = g.input(random(&mut r, &[4, 9, 7]).clone());
        let gamma = g.input(Tensor::filled(&[4], 1.0));
        let beta = g.input(Tensor::zeros(&[4]));
        // eps far below the channel variance
        let y = g.batch_norm(x, gamma, beta, 1e-12).unwrap();
        for ch in g.value(y).data().chunks(63) {
            let mean = ch.iter().sum::<f64>() / 63.0;
            let var = ch.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 63.0;
            assert!(mean.abs() < 1e-6);
            assert!((var - 1.0).abs() < 1e-4);
        }
    }
}

#[test]
fn training_is_bit_reproducible() {
    let run = || {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut store = ParamStore::new();
        let conv = phz_nn::Conv2d::new(&mut store, &mut rng, "c", 2, 2, 3, 1);
        let bn = phz_nn::BatchNorm2d::new(&mut store, "bn", 2);
        let x = random(&mut rng, &[2, 6, 6]);
        let mut adam = Adam::new(0.01);
        for _ in 0..5 {
            let mut g = Graph::new();
            let p = store.bind(&mut g);
            let xi = g.input(x.clone());
            let y = conv.forward(&mut g, &p, xi).unwrap();
            let y = bn.forward(&mut g, &p, y).unwrap();
            let sq = g.mul(y, y).unwrap();
            let loss = g.sum(sq);
            g.backward(loss).unwrap();
            adam.step(&mut store, &p.grads(&g)).unwrap();
        }
        let mut bytes = Vec::new();
        phz_nn::encode_params(&store, &mut bytes).unwrap();
        bytes
    };
    assert_eq!(run(), run());
}
