//! Residue detection and Goldstein branch-cut unwrapping.

use std::collections::VecDeque;
use std::f64::consts::TAU;

use super::itoh::wrap_count_step;
use crate::grid::Grid2D;
use crate::phase::wrap;

/// Residue charges on the `(h-1) x (w-1)` lattice of 2x2 pixel loops.
///
/// Cell `(i, j)` is the loop through pixels `(i, j)`, `(i, j+1)`,
/// `(i+1, j+1)`, `(i+1, j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueMap {
    height: usize,
    width: usize,
    charges: Vec<i8>,
}

impl ResidueMap {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.charges[row * self.width + col]
    }

    pub fn charges(&self) -> &[i8] {
        &self.charges
    }

    /// Number of nonzero residues.
    pub fn count(&self) -> usize {
        self.charges.iter().filter(|&&c| c != 0).count()
    }

    pub fn net_charge(&self) -> i64 {
        self.charges.iter().map(|&c| c as i64).sum()
    }

    /// `(row, col, charge)` of every residue in row-major order.
    pub fn positions(&self) -> impl Iterator<Item = (usize, usize, i8)> + '_ {
        self.charges
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(n, &c)| (n / self.width, n % self.width, c))
    }
}

pub fn residues(psi: &Grid2D) -> ResidueMap {
    let (h, w) = psi.shape();
    let (rh, rw) = (h.saturating_sub(1), w.saturating_sub(1));
    let mut charges = vec![0i8; rh * rw];
    for i in 0..rh {
        for j in 0..rw {
            let a = psi[(i, j)];
            let b = psi[(i, j + 1)];
            let c = psi[(i + 1, j + 1)];
            let d = psi[(i + 1, j)];
            let loop_sum = wrap(b - a) + wrap(c - b) + wrap(d - c) + wrap(a - d);
            charges[i * rw + j] = (loop_sum / TAU).round() as i8;
        }
    }
    ResidueMap {
        height: rh,
        width: rw,
        charges,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoldsteinOutput {
    pub phase: Grid2D,
    /// 1 on branch-cut pixels.
    pub cuts: Grid2D,
    pub residues: ResidueMap,
}

/// Goldstein unwrapping with the reference at pixel `(0, 0)`.
pub fn unwrap_goldstein(psi: &Grid2D) -> Grid2D {
    unwrap_goldstein_with(psi, (0, 0)).phase
}

/// Goldstein unwrapping from an explicit reference pixel.
///
/// If the reference lies on a cut, the first cut-free pixel after it in
/// row-major order is used instead.
pub fn unwrap_goldstein_with(psi: &Grid2D, reference: (usize, usize)) -> GoldsteinOutput {
    let (h, w) = psi.shape();
    let residues = residues(psi);
    let cuts = branch_cuts(&residues, h, w);
    let k = integrate(psi, &cuts, reference);
    let phase = Grid2D::new(
        h,
        w,
        psi.data().iter().zip(&k).map(|(p, k)| p + TAU * k).collect(),
    )
    .expect("shape preserved");
    let cuts = Grid2D::new(h, w, cuts.iter().map(|&c| c as u8 as f64).collect())
        .expect("shape preserved");
    GoldsteinOutput {
        phase,
        cuts,
        residues,
    }
}

fn draw_line(cuts: &mut [bool], width: usize, from: (usize, usize), to: (usize, usize)) {
    let (mut y, mut x) = (from.0 as i64, from.1 as i64);
    let (y1, x1) = (to.0 as i64, to.1 as i64);
    let dx = (x1 - x).abs();
    let dy = -(y1 - y).abs();
    let sx = if x < x1 { 1 } else { -1 };
    let sy = if y < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        cuts[y as usize * width + x as usize] = true;
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// Greedy nearest-neighbour branch cuts with a growing search box.
///
/// Residues are anchored at the top-left pixel of their loop. A tree whose
/// charge cannot be balanced before its search box reaches the image edge is
/// grounded with a straight cut to the nearest border.
fn branch_cuts(res: &ResidueMap, h: usize, w: usize) -> Vec<bool> {
    let mut cuts = vec![false; h * w];
    let (rh, rw) = (res.height(), res.width());
    if rh == 0 || rw == 0 {
        return cuts;
    }
    let mut visited = vec![false; rh * rw];
    let max_radius = rh.max(rw);

    for start in 0..rh * rw {
        if res.charges[start] == 0 || visited[start] {
            continue;
        }
        visited[start] = true;
        let mut tree = vec![start];
        let mut charge = res.charges[start] as i64;
        let mut radius = 1;
        while charge != 0 && radius <= max_radius {
            let mut idx = 0;
            while idx < tree.len() && charge != 0 {
                let a = tree[idx];
                let (ai, aj) = (a / rw, a % rw);
                let (i0, i1) = (ai.saturating_sub(radius), (ai + radius).min(rh - 1));
                let (j0, j1) = (aj.saturating_sub(radius), (aj + radius).min(rw - 1));
                'scan: for i in i0..=i1 {
                    for j in j0..=j1 {
                        let q = i * rw + j;
                        if res.charges[q] == 0 || visited[q] {
                            continue;
                        }
                        visited[q] = true;
                        tree.push(q);
                        charge += res.charges[q] as i64;
                        draw_line(&mut cuts, w, (ai, aj), (i, j));
                        if charge == 0 {
                            break 'scan;
                        }
                    }
                }
                if charge != 0 && box_reaches_border(ai, aj, radius, rh, rw) {
                    draw_line(&mut cuts, w, (ai, aj), nearest_border(ai, aj, h, w));
                    charge = 0;
                }
                idx += 1;
            }
            radius += 1;
        }
    }
    cuts
}

fn box_reaches_border(i: usize, j: usize, radius: usize, rh: usize, rw: usize) -> bool {
    i < radius || j < radius || i + radius >= rh || j + radius >= rw
}

fn nearest_border(i: usize, j: usize, h: usize, w: usize) -> (usize, usize) {
    let candidates = [
        (i, (0, j)),
        (h - 1 - i, (h - 1, j)),
        (j, (i, 0)),
        (w - 1 - j, (i, w - 1)),
    ];
    candidates
        .iter()
        .min_by_key(|(d, _)| *d)
        .map(|&(_, p)| p)
        .expect("non-empty")
}

/// Integer wrap counts by flood fill around the cuts.
fn integrate(psi: &Grid2D, cuts: &[bool], reference: (usize, usize)) -> Vec<f64> {
    let (h, w) = psi.shape();
    let n = h * w;
    let mut k = vec![0.0; n];
    let mut done = vec![false; n];
    let neighbours = |p: usize| {
        let (i, j) = (p / w, p % w);
        let mut out = [None; 4];
        if i > 0 {
            out[0] = Some(p - w);
        }
        if i + 1 < h {
            out[1] = Some(p + w);
        }
        if j > 0 {
            out[2] = Some(p - 1);
        }
        if j + 1 < w {
            out[3] = Some(p + 1);
        }
        out
    };
    let data = psi.data();
    let mut queue = VecDeque::new();
    let flood = |seed: usize, k: &mut [f64], done: &mut [bool], queue: &mut VecDeque<usize>| {
        queue.push_back(seed);
        while let Some(p) = queue.pop_front() {
            for q in neighbours(p).into_iter().flatten() {
                if done[q] || cuts[q] {
                    continue;
                }
                k[q] = k[p] + wrap_count_step(data[p], data[q]);
                done[q] = true;
                queue.push_back(q);
            }
        }
    };

    let start = reference.0.min(h - 1) * w + reference.1.min(w - 1);
    let seed = (start..n).chain(0..start).find(|&p| !cuts[p]);
    if let Some(seed) = seed {
        done[seed] = true;
        flood(seed, &mut k, &mut done, &mut queue);
    } else {
        done[start] = true;
    }

    // cut pixels and regions isolated by cuts are reached through a neighbour
    loop {
        let mut changed = false;
        for p in 0..n {
            if done[p] {
                continue;
            }
            let Some(from) = neighbours(p).into_iter().flatten().find(|&q| done[q]) else {
                continue;
            };
            k[p] = k[from] + wrap_count_step(data[from], data[p]);
            done[p] = true;
            changed = true;
            if !cuts[p] {
                flood(p, &mut k, &mut done, &mut queue);
            }
        }
        if !changed {
            break;
        }
    }
    k
}
