#![allow(dead_code)]

use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scalepath::{EdgeVector, Image, ImagePlane, LatticeGraph, SupportSet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

pub fn random_gray(rng: &mut ChaCha8Rng, h: usize, w: usize) -> Image {
    Image::Gray(ImagePlane::new(h, w, random_vec(rng, h * w, 0.0, 1.0)).unwrap())
}

pub fn random_support(rng: &mut ChaCha8Rng, m: usize) -> SupportSet {
    let p: f64 = rng.random_range(0.0..1.0);
    SupportSet::from_flags((0..m).map(|_| rng.random_bool(p)).collect())
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn rel_err(approx: &[f64], exact: &[f64]) -> f64 {
    let scale = norm(exact);
    if scale == 0.0 {
        norm(approx)
    } else {
        dist(approx, exact) / scale
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Grid Laplacian assembled from neighbour counts, without the edge list.
pub fn dense_laplacian(h: usize, w: usize) -> Vec<Vec<f64>> {
    let p = h * w;
    let mut l = vec![vec![0.0; p]; p];
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            let neighbours = [
                (r > 0).then(|| i - w),
                (r + 1 < h).then(|| i + w),
                (c > 0).then(|| i - 1),
                (c + 1 < w).then(|| i + 1),
            ];
            for j in neighbours.into_iter().flatten() {
                l[i][i] += 1.0;
                l[i][j] -= 1.0;
            }
        }
    }
    l
}

/// Largest eigenvalue of the explicitly assembled joint Hessian
/// `[[I + 2b D^T D, -2b D^T], [-2b D, 2b I]]`.
pub fn dense_hessian_norm(g: &LatticeGraph, beta: f64) -> f64 {
    let (p, m) = (g.pixel_count(), g.edge_count());
    let mut d = Mat::<f64>::zeros(m, p);
    for (e, &(i, j)) in g.edges().iter().enumerate() {
        d[(e, i)] = 1.0;
        d[(e, j)] = -1.0;
    }
    let dtd = d.transpose() * &d;
    let n = p + m;
    let h = Mat::<f64>::from_fn(n, n, |r, c| match (r < p, c < p) {
        (true, true) => f64::from(u8::from(r == c)) + 2.0 * beta * dtd[(r, c)],
        (true, false) => -2.0 * beta * d[(c - p, r)],
        (false, true) => -2.0 * beta * d[(r - p, c)],
        (false, false) => 2.0 * beta * f64::from(u8::from(r == c)),
    });
    let evd = h.self_adjoint_eigen(Side::Lower).unwrap();
    let s = evd.S().column_vector();
    (0..n).map(|k| s[k].abs()).fold(0.0, f64::max)
}

/// Closed form for the grid: the Hessian decouples along singular pairs of
/// `D`, and the largest 2x2 block belongs to the top Laplacian eigenvalue.
pub fn analytic_hessian_norm(h: usize, w: usize, beta: f64) -> f64 {
    let path = |n: usize| {
        let t = std::f64::consts::PI * (n - 1) as f64 / (2 * n) as f64;
        4.0 * t.sin().powi(2)
    };
    let mu = path(h) + path(w);
    let (a, d, b) = (1.0 + 2.0 * beta * mu, 2.0 * beta, 2.0 * beta * mu.sqrt());
    let top = (a + d) / 2.0 + (((a - d) / 2.0).powi(2) + b * b).sqrt();
    top.max(1.0).max(2.0 * beta)
}

/// Central differences of `f` around `v`; exact up to rounding for quadratics.
pub fn central_diff(v: &[f64], step: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut work = v.to_vec();
    (0..v.len())
        .map(|i| {
            work[i] = v[i] + step;
            let up = f(&work);
            work[i] = v[i] - step;
            let down = f(&work);
            work[i] = v[i];
            (up - down) / (2.0 * step)
        })
        .collect()
}

pub fn gamma_from(values: Vec<f64>) -> EdgeVector {
    let m = values.len();
    EdgeVector::from_values(m, 1, values).unwrap()
}

/// Complement-edge differences of `u`; all zero for a feasible projection.
pub fn complement_differences(g: &LatticeGraph, u: &[f64], support: &SupportSet) -> Vec<f64> {
    let p = g.pixel_count();
    u.chunks_exact(p)
        .flat_map(|uc| {
            g.edges()
                .iter()
                .enumerate()
                .filter(|(e, _)| !support.contains(*e))
                .map(|(_, &(i, j))| uc[i] - uc[j])
                .collect::<Vec<_>>()
        })
        .collect()
}

/// 16x16 scenes whose smallest neighbour difference is at least `min_step`.
///
/// The time to full support grows like the inverse of the smallest
/// difference, so level 1.0 is only reachable quickly on such images.
pub fn contrasted_scenes(count: usize, min_step: f64) -> Vec<(u64, Image)> {
    let g = LatticeGraph::new(16, 16).unwrap();
    (0u64..)
        .map(|seed| (seed, scalepath::synth::scene(16, 16, seed).unwrap()))
        .filter(|(_, x)| {
            let dx = g.apply_d(x.pixels()).unwrap();
            dx.values().iter().all(|v| v.abs() >= min_step)
        })
        .take(count)
        .map(|(seed, x)| (seed, Image::Gray(x)))
        .collect()
}
