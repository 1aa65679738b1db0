//! Reading and writing image files.
//!
//! PNG and the PNM family (PGM, PPM) are read; 8-bit samples are divided by
//! 255 and 16-bit samples by 65535. Alpha channels are dropped. Output is
//! always PNG, quantized with `round(v * 255)` at write time.

use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, ImageReader, RgbImage};

use crate::error::{Error, Result};
use crate::lattice::{ColorImage, Image, ImagePlane};

/// How the channels of a loaded file are mapped onto an [`Image`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum ColorMode {
    /// Grayscale files stay gray, everything else becomes RGB.
    #[default]
    Auto,
    /// Color files are converted with BT.601 luma weights.
    Gray,
    /// Grayscale files are replicated into three equal channels.
    Rgb,
}

impl std::str::FromStr for ColorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(ColorMode::Auto),
            "gray" | "grey" => Ok(ColorMode::Gray),
            "rgb" | "color" => Ok(ColorMode::Rgb),
            other => Err(Error::Parameter(format!("unknown color mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for ColorMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ColorMode::Auto => "auto",
            ColorMode::Gray => "gray",
            ColorMode::Rgb => "rgb",
        })
    }
}

/// ITU-R BT.601 luma weights.
pub const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

/// Whether `path` has an extension this module can read.
pub fn is_supported(path: &Path) -> bool {
    format_of(path).is_some()
}

pub(crate) fn format_of(path: &Path) -> Option<ImageFormat> {
    let ext = path.extension()?.to_str()?.to_ascii_lowercase();
    match ext.as_str() {
        "png" => Some(ImageFormat::Png),
        "pgm" | "ppm" | "pnm" => Some(ImageFormat::Pnm),
        _ => None,
    }
}

pub fn load(path: &Path, mode: ColorMode) -> Result<Image> {
    let format = format_of(path).ok_or_else(|| Error::UnsupportedFormat(path.to_path_buf()))?;
    let mut reader = ImageReader::open(path)?;
    reader.set_format(format);
    from_dynamic(&reader.decode()?, mode)
}

/// Decodes an in-memory file of the given format.
pub fn load_bytes(bytes: &[u8], format: ImageFormat, mode: ColorMode) -> Result<Image> {
    from_dynamic(&image::load_from_memory_with_format(bytes, format)?, mode)
}

fn from_dynamic(img: &DynamicImage, mode: ColorMode) -> Result<Image> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let color = img.color();
    let wide = color.bytes_per_pixel() / color.channel_count() > 1;
    let gray_source = !color.has_color();

    let planes: [Vec<f64>; 3] = if wide {
        let buf = img.to_rgb16();
        split_channels(buf.as_raw(), |v| f64::from(v) / 65535.0)
    } else {
        let buf = img.to_rgb8();
        split_channels(buf.as_raw(), |v| f64::from(v) / 255.0)
    };
    let [r, g, b] = planes;

    let as_gray = match mode {
        ColorMode::Auto => gray_source,
        ColorMode::Gray => true,
        ColorMode::Rgb => false,
    };
    if as_gray {
        let px = if gray_source {
            r
        } else {
            r.iter()
                .zip(&g)
                .zip(&b)
                .map(|((r, g), b)| (LUMA[0] * r + LUMA[1] * g + LUMA[2] * b).clamp(0.0, 1.0))
                .collect()
        };
        Ok(Image::Gray(ImagePlane::new(h, w, px)?))
    } else {
        Ok(Image::Rgb(ColorImage::new(
            ImagePlane::new(h, w, r)?,
            ImagePlane::new(h, w, g)?,
            ImagePlane::new(h, w, b)?,
        )?))
    }
}

fn split_channels<T: Copy>(raw: &[T], scale: impl Fn(T) -> f64) -> [Vec<f64>; 3] {
    let n = raw.len() / 3;
    let mut out = [
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    ];
    for px in raw.chunks_exact(3) {
        for (c, &v) in out.iter_mut().zip(px) {
            c.push(scale(v));
        }
    }
    out
}

fn dimension(n: usize) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::Parameter(format!("dimension {n} too large for output")))
}

/// Quantizes `img` to 8 bits and encodes it as PNG.
pub fn to_dynamic(img: &Image) -> Result<DynamicImage> {
    let (h, w) = (dimension(img.height())?, dimension(img.width())?);
    let bad = || Error::Parameter("buffer size mismatch".into());
    Ok(match img {
        Image::Gray(p) => {
            DynamicImage::ImageLuma8(GrayImage::from_raw(w, h, p.to_u8()).ok_or_else(bad)?)
        }
        Image::Rgb(c) => {
            DynamicImage::ImageRgb8(RgbImage::from_raw(w, h, c.to_rgb8()).ok_or_else(bad)?)
        }
    })
}

pub fn save_png(img: &Image, path: &Path) -> Result<()> {
    to_dynamic(img)?.save_with_format(path, ImageFormat::Png)?;
    Ok(())
}

/// PNG-encoded bytes of `img`.
pub fn encode_png(img: &Image) -> Result<Vec<u8>> {
    let mut out = std::io::Cursor::new(Vec::new());
    to_dynamic(img)?.write_to(&mut out, ImageFormat::Png)?;
    Ok(out.into_inner())
}
