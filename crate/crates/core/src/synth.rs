//! Deterministic test images.
//!
//! `scene` images mimic natural photographs at small scale: a shaded
//! background, a handful of overlapping blobs with soft edges, a striped
//! patch and fine-grained sensor-like texture. Every generator is a pure
//! function of its seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::lattice::{ColorImage, ImagePlane};

/// Independent uniform pixels in `[0, 1]`.
pub fn uniform(height: usize, width: usize, seed: u64) -> Result<ImagePlane> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let px = (0..height * width).map(|_| rng.random::<f64>()).collect();
    ImagePlane::new(height, width, px)
}

struct Blob {
    cy: f64,
    cx: f64,
    ry: f64,
    rx: f64,
    level: f64,
}

/// A grayscale scene.
pub fn scene(height: usize, width: usize, seed: u64) -> Result<ImagePlane> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let px = scene_pixels(height, width, &mut rng);
    ImagePlane::new(height, width, px)
}

/// An RGB scene; channels share geometry but not intensities.
pub fn color_scene(height: usize, width: usize, seed: u64) -> Result<ColorImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = scene_pixels(height, width, &mut rng);
    let mut channel = |tint: f64| -> Result<ImagePlane> {
        let gain = rng.random_range(0.6..1.0);
        let px = base
            .iter()
            .map(|&v| squash(tint + gain * (v - 0.5) + rng.random_range(-0.01..0.01)))
            .collect();
        ImagePlane::new(height, width, px)
    };
    let r = channel(0.55)?;
    let g = channel(0.5)?;
    let b = channel(0.45)?;
    ColorImage::new(r, g, b)
}

/// Smooth, strictly increasing map into `(0.05, 0.95)`. Clamping would
/// create runs of identical neighbours, which never enter the support.
fn squash(v: f64) -> f64 {
    0.5 + 0.45 * ((v - 0.5) / 0.45).tanh()
}

fn scene_pixels(height: usize, width: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (h, w) = (height as f64, width as f64);
    let g0 = rng.random_range(0.2..0.5);
    let gy = rng.random_range(-0.25..0.25);
    let gx = rng.random_range(-0.25..0.25);
    let blobs: Vec<Blob> = (0..rng.random_range(2..5))
        .map(|_| Blob {
            cy: rng.random_range(0.15..0.85) * h,
            cx: rng.random_range(0.15..0.85) * w,
            ry: rng.random_range(0.12..0.35) * h,
            rx: rng.random_range(0.12..0.35) * w,
            level: rng.random_range(0.0..1.0),
        })
        .collect();
    let stripe_period = rng.random_range(2.5..5.0);
    let stripe_angle: f64 = rng.random_range(0.0..std::f64::consts::PI);
    let (sy, sx) = (
        rng.random_range(0.0..0.5) * h,
        rng.random_range(0.0..0.5) * w,
    );
    let (sh, sw) = (0.4 * h, 0.4 * w);

    let mut out = Vec::with_capacity(height * width);
    for r in 0..height {
        for c in 0..width {
            let (y, x) = (r as f64 + 0.5, c as f64 + 0.5);
            let mut v = g0 + gy * (y / h - 0.5) + gx * (x / w - 0.5);
            for b in &blobs {
                let d = ((y - b.cy) / b.ry).powi(2) + ((x - b.cx) / b.rx).powi(2);
                // soft edge about one pixel wide
                let inside = 1.0 / (1.0 + ((d.sqrt() - 1.0) * b.ry.min(b.rx)).exp());
                v = v * (1.0 - inside) + b.level * inside;
            }
            if y >= sy && y < sy + sh && x >= sx && x < sx + sw {
                let t = y * stripe_angle.sin() + x * stripe_angle.cos();
                v += 0.12 * (2.0 * std::f64::consts::PI * t / stripe_period).sin();
            }
            v += rng.random_range(-0.04..0.04);
            out.push(squash(v));
        }
    }
    out
}
