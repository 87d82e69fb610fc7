//! Per-channel spatial batch normalization for a batch of one.

pub(crate) struct BnCache {
    pub xhat: Vec<f64>,
    pub inv_std: Vec<f64>,
}

pub(crate) fn forward(
    x: &[f64],
    channels: usize,
    gamma: &[f64],
    beta: &[f64],
    eps: f64,
) -> (Vec<f64>, BnCache) {
    let n = x.len() / channels;
    let mut y = vec![0.0; x.len()];
    let mut xhat = vec![0.0; x.len()];
    let mut inv_std = vec![0.0; channels];
    for c in 0..channels {
        let xs = &x[c * n..(c + 1) * n];
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let is = 1.0 / (var + eps).sqrt();
        inv_std[c] = is;
        for k in 0..n {
            let h = (xs[k] - mean) * is;
            xhat[c * n + k] = h;
            y[c * n + k] = gamma[c] * h + beta[c];
        }
    }
    (y, BnCache { xhat, inv_std })
}

/// Returns `(dx, dgamma, dbeta)`.
pub(crate) fn backward(
    dy: &[f64],
    channels: usize,
    gamma: &[f64],
    cache: &BnCache,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = dy.len() / channels;
    let mut dx = vec![0.0; dy.len()];
    let mut dgamma = vec![0.0; channels];
    let mut dbeta = vec![0.0; channels];
    for c in 0..channels {
        let g = &dy[c * n..(c + 1) * n];
        let h = &cache.xhat[c * n..(c + 1) * n];
        let sum_g: f64 = g.iter().sum();
        let sum_gh: f64 = g.iter().zip(h).map(|(a, b)| a * b).sum();
        dgamma[c] = sum_gh;
        dbeta[c] = sum_g;
        let k = gamma[c] * cache.inv_std[c] / n as f64;
        for i in 0..n {
            dx[c * n + i] = k * (n as f64 * g[i] - sum_g - h[i] * sum_gh);
        }
    }
    (dx, dgamma, dbeta)
}
