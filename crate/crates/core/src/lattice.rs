//! Pixel lattices and the graph difference operator.
//!
//! A `h x w` image is a vector of `p = h * w` pixels in row-major order. The
//! lattice connects every pixel to its right and down neighbour, and the
//! difference operator `D` maps an image to one value per edge:
//! `(D u)(i, j) = u[i] - u[j]`. Its adjoint `D^T` scatters edge values back
//! onto pixels with `+` at the tail and `-` at the head of each edge.
//!
//! Multi-channel data is stored planar: channel `c` of an image occupies
//! `data[c * p..(c + 1) * p]` and channel `c` of an edge vector occupies
//! `values[c * m..(c + 1) * m]`.

use crate::error::{Error, Result};

/// A single-channel raster, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ImagePlane {
    height: usize,
    width: usize,
    pixels: Vec<f64>,
}

impl ImagePlane {
    /// Builds a plane from normalized pixels. Every value must be finite and
    /// lie in `[0, 1]`.
    pub fn new(height: usize, width: usize, pixels: Vec<f64>) -> Result<Self> {
        let p = pixel_count(height, width)?;
        if pixels.len() != p {
            return Err(Error::mismatch("image plane", p, pixels.len()));
        }
        if let Some((index, &value)) = pixels
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::PixelRange { index, value });
        }
        Ok(ImagePlane {
            height,
            width,
            pixels,
        })
    }

    /// Builds a plane without the `[0, 1]` range check. Used for iterates and
    /// projections, which are real-valued but not necessarily normalized.
    pub fn from_real(height: usize, width: usize, pixels: Vec<f64>) -> Result<Self> {
        let p = pixel_count(height, width)?;
        if pixels.len() != p {
            return Err(Error::mismatch("image plane", p, pixels.len()));
        }
        Ok(ImagePlane {
            height,
            width,
            pixels,
        })
    }

    pub fn constant(height: usize, width: usize, value: f64) -> Result<Self> {
        let p = pixel_count(height, width)?;
        Self::new(height, width, vec![value; p])
    }

    /// Builds a plane from 8-bit samples, dividing by 255.
    pub fn from_u8(height: usize, width: usize, samples: &[u8]) -> Result<Self> {
        Self::new(
            height,
            width,
            samples.iter().map(|&s| f64::from(s) / 255.0).collect(),
        )
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    /// Quantizes to 8 bits with `round(v * 255)` clamped to `[0, 255]`.
    pub fn to_u8(&self) -> Vec<u8> {
        self.pixels.iter().map(|&v| quantize(v)).collect()
    }
}

pub(crate) fn quantize(v: f64) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

/// An RGB image: three planes of identical size.
#[derive(Clone, Debug, PartialEq)]
pub struct ColorImage {
    channels: [ImagePlane; 3],
}

impl ColorImage {
    pub fn new(red: ImagePlane, green: ImagePlane, blue: ImagePlane) -> Result<Self> {
        for plane in [&green, &blue] {
            if plane.height != red.height || plane.width != red.width {
                return Err(Error::mismatch("color channel", red.len(), plane.len()));
            }
        }
        Ok(ColorImage {
            channels: [red, green, blue],
        })
    }

    pub fn height(&self) -> usize {
        self.channels[0].height
    }

    pub fn width(&self) -> usize {
        self.channels[0].width
    }

    pub fn channels(&self) -> &[ImagePlane; 3] {
        &self.channels
    }

    /// Interleaved 8-bit RGB samples.
    pub fn to_rgb8(&self) -> Vec<u8> {
        let p = self.channels[0].len();
        let mut out = Vec::with_capacity(3 * p);
        for i in 0..p {
            for c in &self.channels {
                out.push(quantize(c.pixels[i]));
            }
        }
        out
    }
}

/// A grayscale or RGB image.
#[derive(Clone, Debug, PartialEq)]
pub enum Image {
    Gray(ImagePlane),
    Rgb(ColorImage),
}

impl Image {
    pub fn height(&self) -> usize {
        match self {
            Image::Gray(p) => p.height,
            Image::Rgb(c) => c.height(),
        }
    }

    pub fn width(&self) -> usize {
        match self {
            Image::Gray(p) => p.width,
            Image::Rgb(c) => c.width(),
        }
    }

    pub fn channel_count(&self) -> usize {
        match self {
            Image::Gray(_) => 1,
            Image::Rgb(_) => 3,
        }
    }

    pub fn planes(&self) -> Vec<&ImagePlane> {
        match self {
            Image::Gray(p) => vec![p],
            Image::Rgb(c) => c.channels.iter().collect(),
        }
    }

    /// Channel-planar copy of all pixel data.
    pub fn to_planar(&self) -> Vec<f64> {
        self.planes()
            .into_iter()
            .flat_map(|p| p.pixels.iter().copied())
            .collect()
    }

    /// Rebuilds an image with the same shape as `self` from planar data.
    /// Values are not range-checked.
    pub fn with_planar(&self, data: Vec<f64>) -> Result<Image> {
        let (h, w) = (self.height(), self.width());
        let p = h * w;
        let c = self.channel_count();
        if data.len() != c * p {
            return Err(Error::mismatch("planar image", c * p, data.len()));
        }
        Ok(match self {
            Image::Gray(_) => Image::Gray(ImagePlane::from_real(h, w, data)?),
            Image::Rgb(_) => {
                let mut chunks = data.chunks_exact(p).map(|c| c.to_vec());
                let mut next = || ImagePlane::from_real(h, w, chunks.next().unwrap());
                Image::Rgb(ColorImage::new(next()?, next()?, next()?)?)
            }
        })
    }
}

fn pixel_count(height: usize, width: usize) -> Result<usize> {
    if height == 0 || width == 0 {
        return Err(Error::InvalidDimensions { height, width });
    }
    height
        .checked_mul(width)
        // edge count is at most 2p, keep that representable too
        .filter(|p| p.checked_mul(2).is_some())
        .ok_or(Error::InvalidDimensions { height, width })
}

/// The 4-connected grid graph of an `h x w` image.
///
/// Edges are enumerated horizontally first (scan order), then vertically
/// (scan order); each edge is stored as `(i, j)` with `i < j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeGraph {
    height: usize,
    width: usize,
    edges: Vec<(usize, usize)>,
}

impl LatticeGraph {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        pixel_count(height, width)?;
        let m = height * (width - 1) + width * (height - 1);
        let mut edges = Vec::with_capacity(m);
        for r in 0..height {
            for c in 0..width - 1 {
                let i = r * width + c;
                edges.push((i, i + 1));
            }
        }
        for r in 0..height - 1 {
            for c in 0..width {
                let i = r * width + c;
                edges.push((i, i + width));
            }
        }
        debug_assert_eq!(edges.len(), m);
        Ok(LatticeGraph {
            height,
            width,
            edges,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixel_count(&self) -> usize {
        self.height * self.width
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// `D u` for a single plane.
    pub fn apply_d(&self, u: &[f64]) -> Result<EdgeVector> {
        let channels = self.channels_of(u.len(), "apply_d")?;
        let mut out = EdgeVector::zeros(self.edge_count(), channels);
        self.apply_d_into(u, &mut out.values);
        Ok(out)
    }

    /// `D^T w`, returning a planar pixel vector with as many channels as `w`.
    pub fn apply_dt(&self, w: &EdgeVector) -> Result<Vec<f64>> {
        if w.edge_count != self.edge_count() {
            return Err(Error::mismatch("apply_dt", self.edge_count(), w.edge_count));
        }
        let mut out = vec![0.0; w.channels * self.pixel_count()];
        self.apply_dt_into(&w.values, &mut out);
        Ok(out)
    }

    fn channels_of(&self, len: usize, context: &'static str) -> Result<usize> {
        let p = self.pixel_count();
        if len == 0 || len % p != 0 {
            return Err(Error::mismatch(context, p, len));
        }
        Ok(len / p)
    }

    /// Unchecked planar `D u`; `out.len()` must be `channels * m` where
    /// `u.len()` is `channels * p`.
    pub(crate) fn apply_d_into(&self, u: &[f64], out: &mut [f64]) {
        let p = self.pixel_count();
        let m = self.edge_count();
        for (uc, oc) in u.chunks_exact(p).zip(out.chunks_exact_mut(m.max(1))) {
            for (o, &(i, j)) in oc.iter_mut().zip(&self.edges) {
                *o = uc[i] - uc[j];
            }
        }
    }

    /// Unchecked planar `D^T w`, overwriting `out`.
    pub(crate) fn apply_dt_into(&self, w: &[f64], out: &mut [f64]) {
        let p = self.pixel_count();
        let m = self.edge_count();
        out.iter_mut().for_each(|v| *v = 0.0);
        if m == 0 {
            return;
        }
        for (wc, oc) in w.chunks_exact(m).zip(out.chunks_exact_mut(p)) {
            for (&v, &(i, j)) in wc.iter().zip(&self.edges) {
                oc[i] += v;
                oc[j] -= v;
            }
        }
    }
}

/// One value per edge and channel, channel-planar.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeVector {
    edge_count: usize,
    channels: usize,
    values: Vec<f64>,
}

impl EdgeVector {
    pub fn zeros(edge_count: usize, channels: usize) -> Self {
        EdgeVector {
            edge_count,
            channels,
            values: vec![0.0; edge_count * channels],
        }
    }

    pub fn from_values(edge_count: usize, channels: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != edge_count * channels {
            return Err(Error::mismatch(
                "edge vector",
                edge_count * channels,
                values.len(),
            ));
        }
        Ok(EdgeVector {
            edge_count,
            channels,
            values,
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value of edge `e` in channel `c`.
    pub fn get(&self, e: usize, c: usize) -> f64 {
        self.values[c * self.edge_count + e]
    }

    /// Whether edge `e` is nonzero in any channel.
    pub fn is_active(&self, e: usize) -> bool {
        (0..self.channels).any(|c| self.get(e, c) != 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_enumeration() {
        assert_eq!(LatticeGraph::new(1, 1).unwrap().edge_count(), 0);
        let g = LatticeGraph::new(2, 2).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (2, 3), (0, 2), (1, 3)]);
        assert_eq!(LatticeGraph::new(3, 3).unwrap().edge_count(), 12);
        let g = LatticeGraph::new(4, 7).unwrap();
        assert_eq!(g.edge_count(), 4 * 6 + 7 * 3);
        assert!(g.edges().iter().all(|&(i, j)| i < j));
    }

    #[test]
    fn bad_dimensions() {
        assert!(matches!(
            LatticeGraph::new(0, 3),
            Err(Error::InvalidDimensions { .. })
        ));
        assert!(LatticeGraph::new(3, 0).is_err());
        assert!(LatticeGraph::new(usize::MAX, 2).is_err());
    }

    #[test]
    fn difference_examples() {
        let g = LatticeGraph::new(2, 2).unwrap();
        let d = g.apply_d(&[0.0, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!(d.values(), &[-1.0, -1.0, 0.0, 0.0]);

        let g = LatticeGraph::new(1, 2).unwrap();
        assert_eq!(g.apply_d(&[0.7, 0.2]).unwrap().values(), &[0.7 - 0.2]);

        let g = LatticeGraph::new(5, 3).unwrap();
        let d = g.apply_d(&[0.3; 15]).unwrap();
        assert!(d.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn adjoint_examples() {
        let g = LatticeGraph::new(1, 2).unwrap();
        let w = EdgeVector::from_values(1, 1, vec![1.0]).unwrap();
        assert_eq!(g.apply_dt(&w).unwrap(), vec![1.0, -1.0]);

        let g = LatticeGraph::new(3, 4).unwrap();
        let z = EdgeVector::zeros(g.edge_count(), 1);
        assert!(g.apply_dt(&z).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mismatched_lengths() {
        let g = LatticeGraph::new(2, 3).unwrap();
        assert!(g.apply_d(&[0.0; 5]).is_err());
        assert!(g.apply_dt(&EdgeVector::zeros(3, 1)).is_err());
    }

    #[test]
    fn multichannel_difference_is_per_channel() {
        let g = LatticeGraph::new(1, 3).unwrap();
        let d = g.apply_d(&[0.0, 1.0, 3.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(d.channels(), 2);
        assert_eq!(d.values(), &[-1.0, -2.0, 0.0, 0.0]);
    }

    #[test]
    fn plane_validation() {
        assert!(ImagePlane::new(1, 2, vec![0.0, 1.5]).is_err());
        assert!(ImagePlane::new(1, 2, vec![0.0, f64::NAN]).is_err());
        assert!(ImagePlane::new(2, 2, vec![0.0; 3]).is_err());
        let p = ImagePlane::from_u8(1, 2, &[0, 255]).unwrap();
        assert_eq!(p.pixels(), &[0.0, 1.0]);
        assert_eq!(p.to_u8(), vec![0, 255]);
        assert_eq!(quantize(-0.2), 0);
        assert_eq!(quantize(0.5), 128);
    }

    #[test]
    fn color_channels_share_shape() {
        let a = ImagePlane::constant(2, 2, 0.1).unwrap();
        let b = ImagePlane::constant(2, 3, 0.1).unwrap();
        assert!(ColorImage::new(a.clone(), a.clone(), b).is_err());
        let img = Image::Rgb(ColorImage::new(a.clone(), a.clone(), a).unwrap());
        let planar = img.to_planar();
        assert_eq!(planar.len(), 12);
        assert_eq!(img.with_planar(planar).unwrap(), img);
    }
}
