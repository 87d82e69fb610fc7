//! Bilinear 2x upsampling with half-pixel centres and edge clamping.

/// Source taps `(i0, i1, t)` for each of the `2n` output positions:
/// `out = (1 - t) * x[i0] + t * x[i1]`.
fn taps(n: usize) -> Vec<(usize, usize, f64)> {
    (0..2 * n)
        .map(|o| {
            let s = ((o as f64 + 0.5) / 2.0 - 0.5).max(0.0);
            let i0 = (s.floor() as usize).min(n - 1);
            let i1 = (i0 + 1).min(n - 1);
            (i0, i1, s - i0 as f64)
        })
        .collect()
}

pub(crate) fn forward(x: &[f64], c: usize, h: usize, w: usize) -> Vec<f64> {
    let (ty, tx) = (taps(h), taps(w));
    let (oh, ow) = (2 * h, 2 * w);
    let mut out = vec![0.0; c * oh * ow];
    for ch in 0..c {
        let plane = &x[ch * h * w..(ch + 1) * h * w];
        let dst = &mut out[ch * oh * ow..(ch + 1) * oh * ow];
        for (oy, &(y0, y1, a)) in ty.iter().enumerate() {
            for (ox, &(x0, x1, b)) in tx.iter().enumerate() {
                let top = (1.0 - b) * plane[y0 * w + x0] + b * plane[y0 * w + x1];
                let bottom = (1.0 - b) * plane[y1 * w + x0] + b * plane[y1 * w + x1];
                dst[oy * ow + ox] = (1.0 - a) * top + a * bottom;
            }
        }
    }
    out
}

pub(crate) fn backward(dy: &[f64], c: usize, h: usize, w: usize) -> Vec<f64> {
    let (ty, tx) = (taps(h), taps(w));
    let (oh, ow) = (2 * h, 2 * w);
    let mut dx = vec![0.0; c * h * w];
    for ch in 0..c {
        let src = &dy[ch * oh * ow..(ch + 1) * oh * ow];
        let plane = &mut dx[ch * h * w..(ch + 1) * h * w];
        for (oy, &(y0, y1, a)) in ty.iter().enumerate() {
            for (ox, &(x0, x1, b)) in tx.iter().enumerate() {
                let g = src[oy * ow + ox];
                plane[y0 * w + x0] += (1.0 - a) * (1.0 - b) * g;
                plane[y0 * w + x1] += (1.0 - a) * b * g;
                plane[y1 * w + x0] += a * (1.0 - b) * g;
                plane[y1 * w + x1] += a * b * g;
            }
        }
    }
    dx
}
