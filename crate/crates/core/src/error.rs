use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid image dimensions {height}x{width}")]
    InvalidDimensions { height: usize, width: usize },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("pixel value {value} at index {index} is outside [0, 1]")]
    PixelRange { index: usize, value: f64 },

    #[error(
        "step size too large: loss rose from {before:e} to {after:e} at iteration {iteration}"
    )]
    StepSize {
        iteration: usize,
        before: f64,
        after: f64,
    },

    #[error("oracle solver did not converge after {iterations} iterations")]
    OracleNonConvergence { iterations: usize },

    #[error("unsupported image format: {}", .0.display())]
    UnsupportedFormat(PathBuf),

    #[error("unmatched files: {}", .0.join(" "))]
    UnmatchedFiles(Vec<String>),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn mismatch(context: &'static str, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            context,
            expected,
            found,
        }
    }
}
