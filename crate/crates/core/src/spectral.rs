//! Frequency-domain tools: radial low/high splits and averaged spectra.
//!
//! Frequencies are addressed by centered integer coordinates: index `k` of an
//! `n`-point transform maps to `k` for `k < ceil(n/2)` and to `k - n`
//! otherwise, which matches the layout after an fft-shift. A frequency
//! belongs to the low band when its Euclidean distance from DC is at most the
//! cut-off radius.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::lattice::ImagePlane;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Band {
    Low,
    High,
}

/// Indicator of one radial band on an `h x w` frequency grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyMask {
    pub height: usize,
    pub width: usize,
    pub radius: f64,
    pub band: Band,
}

fn centered(k: usize, n: usize) -> f64 {
    if k < n.div_ceil(2) {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

impl FrequencyMask {
    pub fn new(height: usize, width: usize, radius: f64, band: Band) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Parameter(format!(
                "cut-off radius must be positive, got {radius}"
            )));
        }
        if height == 0 || width == 0 {
            return Err(Error::InvalidDimensions { height, width });
        }
        Ok(FrequencyMask {
            height,
            width,
            radius,
            band,
        })
    }

    /// Whether the unshifted frequency index `(ky, kx)` is in this band.
    pub fn contains(&self, ky: usize, kx: usize) -> bool {
        let fy = centered(ky, self.height);
        let fx = centered(kx, self.width);
        let low = fy.hypot(fx) <= self.radius;
        low == (self.band == Band::Low)
    }

    /// 0/1 mask in unshifted (transform) layout, row-major.
    pub fn values(&self) -> Vec<f64> {
        (0..self.height * self.width)
            .map(|i| f64::from(u8::from(self.contains(i / self.width, i % self.width))))
            .collect()
    }
}

fn fft2(data: &mut [Complex<f64>], height: usize, width: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let (row_fft, col_fft) = if inverse {
        (
            planner.plan_fft_inverse(width),
            planner.plan_fft_inverse(height),
        )
    } else {
        (
            planner.plan_fft_forward(width),
            planner.plan_fft_forward(height),
        )
    };
    for row in data.chunks_exact_mut(width) {
        row_fft.process(row);
    }
    let mut col = vec![Complex::new(0.0, 0.0); height];
    for c in 0..width {
        for r in 0..height {
            col[r] = data[r * width + c];
        }
        col_fft.process(&mut col);
        for r in 0..height {
            data[r * width + c] = col[r];
        }
    }
    if inverse {
        let scale = 1.0 / (height * width) as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }
}

/// Forward 2-D DFT of a real row-major image (unnormalized, unshifted).
pub fn fft2_real(pixels: &[f64], height: usize, width: usize) -> Vec<Complex<f64>> {
    let mut data: Vec<Complex<f64>> = pixels.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft2(&mut data, height, width, false);
    data
}

fn inverse_real(mut spectrum: Vec<Complex<f64>>, height: usize, width: usize) -> Vec<f64> {
    fft2(&mut spectrum, height, width, true);
    spectrum.into_iter().map(|v| v.re).collect()
}

/// Splits `x` into its low-frequency part (radius `<= r`) and the rest.
/// The two parts sum back to `x` up to rounding.
pub fn decompose(x: &ImagePlane, radius: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    decompose_real(x.pixels(), x.height(), x.width(), radius)
}

/// [`decompose`] for unnormalized real data.
pub fn decompose_real(
    pixels: &[f64],
    height: usize,
    width: usize,
    radius: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mask = FrequencyMask::new(height, width, radius, Band::Low)?;
    if pixels.len() != height * width {
        return Err(Error::mismatch(
            "decompose input",
            height * width,
            pixels.len(),
        ));
    }
    let spectrum = fft2_real(pixels, height, width);
    let zero = Complex::new(0.0, 0.0);
    let (mut low, mut high) = (spectrum.clone(), spectrum);
    for i in 0..height * width {
        if mask.contains(i / width, i % width) {
            high[i] = zero;
        } else {
            low[i] = zero;
        }
    }
    Ok((
        inverse_real(low, height, width),
        inverse_real(high, height, width),
    ))
}

pub fn energy(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Energy of the high band (radius `> r`) of real data.
pub fn high_band_energy(pixels: &[f64], height: usize, width: usize, radius: f64) -> Result<f64> {
    Ok(energy(&decompose_real(pixels, height, width, radius)?.1))
}

/// A magnitude spectrum in centered layout (DC at `(h/2, w/2)`).
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub height: usize,
    pub width: usize,
    pub magnitude: Vec<f64>,
}

impl Spectrum {
    fn offset(n: usize) -> usize {
        n / 2
    }

    /// Squared magnitude inside and outside radius `r`.
    pub fn band_energy(&self, radius: f64) -> (f64, f64) {
        let (oy, ox) = (Self::offset(self.height), Self::offset(self.width));
        let mut low = 0.0;
        let mut high = 0.0;
        for (i, &m) in self.magnitude.iter().enumerate() {
            let fy = (i / self.width) as f64 - oy as f64;
            let fx = (i % self.width) as f64 - ox as f64;
            if fy.hypot(fx) <= radius {
                low += m * m;
            } else {
                high += m * m;
            }
        }
        (low, high)
    }

    /// Fraction of energy outside radius `r`; zero for an all-zero spectrum.
    pub fn high_fraction(&self, radius: f64) -> f64 {
        let (low, high) = self.band_energy(radius);
        if low + high == 0.0 {
            0.0
        } else {
            high / (low + high)
        }
    }

    /// Magnitudes scaled to `[0, 1]` by the maximum, for display.
    pub fn normalized(&self) -> Vec<f64> {
        let max = self.magnitude.iter().copied().fold(0.0, f64::max);
        if max == 0.0 {
            return vec![0.0; self.magnitude.len()];
        }
        self.magnitude.iter().map(|&m| m / max).collect()
    }
}

/// `|mean_k (F(x_k) - F(s_k))|`, centered.
pub fn expected_spectral_diff(
    originals: &[ImagePlane],
    smoothed: &[ImagePlane],
) -> Result<Spectrum> {
    if originals.is_empty() {
        return Err(Error::Parameter(
            "at least one image pair is required".into(),
        ));
    }
    if originals.len() != smoothed.len() {
        return Err(Error::mismatch(
            "image pairs",
            originals.len(),
            smoothed.len(),
        ));
    }
    let (h, w) = (originals[0].height(), originals[0].width());
    let mut mean = vec![Complex::new(0.0, 0.0); h * w];
    for (a, b) in originals.iter().zip(smoothed) {
        for img in [a, b] {
            if img.height() != h || img.width() != w {
                return Err(Error::mismatch("spectrum image size", h * w, img.len()));
            }
        }
        let diff: Vec<f64> = a
            .pixels()
            .iter()
            .zip(b.pixels())
            .map(|(x, y)| x - y)
            .collect();
        for (acc, v) in mean.iter_mut().zip(fft2_real(&diff, h, w)) {
            *acc += v;
        }
    }
    let n = originals.len() as f64;
    let (oy, ox) = (Spectrum::offset(h), Spectrum::offset(w));
    let mut magnitude = vec![0.0; h * w];
    for (i, v) in mean.iter().enumerate() {
        let (r, c) = ((i / w + oy) % h, (i % w + ox) % w);
        magnitude[r * w + c] = v.norm() / n;
    }
    Ok(Spectrum {
        height: h,
        width: w,
        magnitude,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn masks_partition() {
        let low = FrequencyMask::new(7, 8, 2.5, Band::Low).unwrap().values();
        let high = FrequencyMask::new(7, 8, 2.5, Band::High).unwrap().values();
        assert!(low.iter().zip(&high).all(|(a, b)| a + b == 1.0));
        // the boundary ring belongs to the low band
        let m = FrequencyMask::new(8, 8, 2.0, Band::Low).unwrap();
        assert!(m.contains(2, 0) && m.contains(0, 6) && !m.contains(2, 1));
        assert!(FrequencyMask::new(4, 4, 0.0, Band::Low).is_err());
        assert!(FrequencyMask::new(4, 4, f64::NAN, Band::Low).is_err());
    }

    #[test]
    fn decompose_limits() {
        let x = synth::scene(12, 10, 1).unwrap();
        let (low, high) = decompose(&x, 100.0).unwrap();
        assert!(low
            .iter()
            .zip(x.pixels())
            .all(|(a, b)| (a - b).abs() < 1e-12));
        assert!(high.iter().all(|v| v.abs() < 1e-12));

        let c = ImagePlane::constant(6, 6, 0.7).unwrap();
        let (low, high) = decompose(&c, 0.5).unwrap();
        assert!(low.iter().all(|v| (v - 0.7).abs() < 1e-12));
        assert!(high.iter().all(|v| v.abs() < 1e-12));
        assert!(decompose(&c, -1.0).is_err());
    }

    #[test]
    fn identical_sets_have_zero_spectrum() {
        let a = vec![
            synth::scene(8, 8, 0).unwrap(),
            synth::scene(8, 8, 1).unwrap(),
        ];
        let s = expected_spectral_diff(&a, &a).unwrap();
        assert!(s.magnitude.iter().all(|&m| m == 0.0));
        assert_eq!(s.high_fraction(2.0), 0.0);
        assert!(s.normalized().iter().all(|&m| m == 0.0));
        assert!(expected_spectral_diff(&[], &[]).is_err());
        assert!(expected_spectral_diff(&a, &a[..1]).is_err());
    }

    #[test]
    fn impulse_difference_is_flat() {
        let a = ImagePlane::constant(6, 5, 0.5).unwrap();
        let mut px = a.pixels().to_vec();
        px[13] += 0.25;
        let b = ImagePlane::new(6, 5, px).unwrap();
        let s = expected_spectral_diff(&[a], &[b]).unwrap();
        assert!(s.magnitude.iter().all(|&m| (m - 0.25).abs() < 1e-12));
    }

    #[test]
    fn centered_layout_puts_dc_in_the_middle() {
        let a = ImagePlane::constant(5, 6, 0.5).unwrap();
        let b = ImagePlane::constant(5, 6, 0.25).unwrap();
        let s = expected_spectral_diff(&[a], &[b]).unwrap();
        let dc = 2 * 6 + 3;
        assert!((s.magnitude[dc] - 0.25 * 30.0).abs() < 1e-12);
        assert!(s
            .magnitude
            .iter()
            .enumerate()
            .all(|(i, &m)| i == dc || m.abs() < 1e-12));
        let (low, high) = s.band_energy(1.0);
        assert!(low > 0.0 && high.abs() < 1e-20);
    }
}
