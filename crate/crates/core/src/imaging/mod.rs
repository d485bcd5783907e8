//! Enhancement operations for captured frames.
//!
//! Every operation is a pure function of its input bytes. Arithmetic that
//! produces fractional values rounds half away from zero, and every
//! neighbourhood operation replicates edge pixels at the border, so results
//! are reproducible byte-for-byte on any platform.

mod adjust;
mod color;
mod edge;
mod filter;
mod histogram;
mod pipeline;
mod raster;
mod rotate;

use thiserror::Error;

pub use adjust::{gray_adjust, GrayWindow};
pub use color::{complement, raw_image_bits, rgb_to_gray, GRAY_WEIGHTS};
pub use edge::{edge_detect, gaussian_kernel, EdgeOperator, DEFAULT_THRESHOLD_FRAC};
pub use filter::{noise_filter, FilterKind};
pub use histogram::{histogram, Histogram256};
pub use pipeline::{apply_pipeline, check_pipeline, EnhancementOp, LineageEntry, PipelineError, PipelineOutput};
pub use raster::{AnyImage, GrayImage, Raster, RgbImage};
pub use rotate::rotate_quarter;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImagingError {
    #[error("image dimensions must be at least 1x1")]
    EmptyImage,
    #[error("pixel buffer holds {actual} bytes, expected {expected}")]
    BufferSize { expected: usize, actual: usize },
    #[error("size arithmetic overflowed")]
    Overflow,
    #[error("invalid gray window: {0}")]
    InvalidWindow(String),
    #[error("bad filter kernel: {0}")]
    BadKernel(String),
    #[error("bad edge parameters: {0}")]
    BadParams(String),
    #[error("rotation turns must be 0..=3, got {0}")]
    BadTurns(u8),
}
