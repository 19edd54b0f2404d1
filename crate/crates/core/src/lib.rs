//! Iterative tight-frame segmentation of tubular structures in 2D images.
//!
//! The pipeline seeds an uncertainty set from gradient magnitude, then
//! alternates data-driven thresholding with masked tight-frame denoising
//! until every pixel has committed to vessel or background. See the
//! [`segmenter`] module for the driver and the README for the big picture.

pub mod cli;
pub mod error;
pub mod image;
pub mod metrics;
pub mod phantom;
pub mod scale_space;
pub mod segmenter;
pub mod sure;
pub mod tight_frame;

pub use error::{Error, Result};
pub use image::{BinaryMask, Channel, Image, Pixel, PixelSet};
