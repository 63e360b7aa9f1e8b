//! Raster types and the pure pixel operations shared by every other module.
//!
//! Images are stored row-major with interleaved channels and values in
//! `[0, 1]`. Masks are binary rasters, and [`GrayField`] holds unbounded
//! single-channel intermediates such as noise fields and difference images.

mod io;
mod ops;

pub use io::{load_any, load_png, save_field_png, save_image_png, save_mask_png};
pub(crate) use ops::sample_bilinear;
pub use ops::{
    block_reduce, block_reduce_mean, crop, resize_bilinear, resize_nearest, rotate, threshold,
    to_grayscale, BlockReduce,
};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("unsupported format in {path}: {reason}")]
    UnsupportedFormat { path: PathBuf, reason: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to decode {path}: {reason}")]
    Decode { path: PathBuf, reason: String },
    #[error("invalid block size 0")]
    InvalidBlockSize,
    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("invalid raster: {0}")]
    InvalidRaster(String),
}

/// H×W×C raster with channel values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
}

impl ImageBuffer {
    /// Builds an image, rejecting wrong lengths, channel counts other than 1
    /// or 3, and values outside `[0, 1]`.
    pub fn new(
        width: usize,
        height: usize,
        channels: usize,
        data: Vec<f32>,
    ) -> Result<Self, ImageError> {
        if channels != 1 && channels != 3 {
            return Err(ImageError::InvalidRaster(format!(
                "channel count must be 1 or 3, got {channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(ImageError::InvalidRaster(format!(
                "data length {} != {width}x{height}x{channels}",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(ImageError::InvalidRaster(format!(
                "value {v} outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f32) -> Self {
        assert!(channels == 1 || channels == 3, "channels must be 1 or 3");
        Self {
            width,
            height,
            channels,
            data: vec![value.clamp(0.0, 1.0); width * height * channels],
        }
    }

    /// Builds an image from a per-pixel function; outputs are clamped to `[0, 1]`.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Self {
        assert!(channels == 1 || channels == 3, "channels must be 1 or 3");
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c).clamp(0.0, 1.0));
                }
            }
        }
        Self {
            width,
            height,
            channels,
            data,
        }
    }

    /// Internal constructor for operations that already guarantee the invariants.
    pub(crate) fn from_raw(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), width * height * channels);
        Self {
            width,
            height,
            channels,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[f32] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    /// Returns a copy with the requested channel count. Gray to RGB replicates
    /// the channel, RGB to gray uses the luminance weights of [`to_grayscale`].
    pub fn with_channels(&self, channels: usize) -> ImageBuffer {
        match (self.channels, channels) {
            (a, b) if a == b => self.clone(),
            (1, 3) => ImageBuffer::from_raw(
                self.width,
                self.height,
                3,
                self.data.iter().flat_map(|&v| [v, v, v]).collect(),
            ),
            (3, 1) => {
                let gray = to_grayscale(self);
                ImageBuffer::from_raw(
                    self.width,
                    self.height,
                    1,
                    gray.data().iter().map(|&v| v.clamp(0.0, 1.0)).collect(),
                )
            }
            (_, c) => panic!("unsupported channel count {c}"),
        }
    }
}

/// Binary H×W raster.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mask {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Mask {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImageError> {
        if data.len() != width * height {
            return Err(ImageError::InvalidRaster(format!(
                "mask length {} != {width}x{height}",
                data.len()
            )));
        }
        if data.iter().any(|&v| v > 1) {
            return Err(ImageError::InvalidRaster(
                "mask values must be 0 or 1".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(u8::from(f(x, y)));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x] == 1
    }

    pub fn count(&self) -> usize {
        self.data.iter().map(|&v| v as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn area_fraction(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.count() as f64 / self.data.len() as f64
    }

    pub fn complement(&self) -> Mask {
        Mask {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| 1 - v).collect(),
        }
    }

    /// Pixelwise AND. Panics on mismatched dimensions.
    pub fn and(&self, other: &Mask) -> Mask {
        assert_eq!(self.dims(), other.dims(), "mask dimensions differ");
        Mask {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a & b)
                .collect(),
        }
    }

    /// True when every set pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.dims() == other.dims() && self.data.iter().zip(&other.data).all(|(&a, &b)| a <= b)
    }
}

/// Single-channel field of unbounded reals.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayField {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl GrayField {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self, ImageError> {
        if data.len() != width * height {
            return Err(ImageError::InvalidRaster(format!(
                "field length {} != {width}x{height}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len() as f64
    }

    /// Pixelwise `|self - other|`.
    pub fn abs_diff(&self, other: &GrayField) -> Result<GrayField, ImageError> {
        if self.dims() != other.dims() {
            return Err(ImageError::DimensionMismatch {
                expected: self.dims(),
                actual: other.dims(),
            });
        }
        Ok(GrayField {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| (a - b).abs())
                .collect(),
        })
    }
}

impl From<&Mask> for GrayField {
    fn from(mask: &Mask) -> Self {
        GrayField {
            width: mask.width,
            height: mask.height,
            data: mask.data.iter().map(|&v| v as f32).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn image_rejects_out_of_range_values() {
        assert!(ImageBuffer::new(1, 1, 1, vec![1.5]).is_err());
        assert!(ImageBuffer::new(1, 1, 2, vec![0.5, 0.5]).is_err());
        assert!(ImageBuffer::new(2, 1, 1, vec![0.5]).is_err());
        assert!(ImageBuffer::new(2, 1, 1, vec![0.5, 0.0]).is_ok());
    }

    #[test]
    fn mask_rejects_non_binary() {
        assert!(Mask::new(2, 1, vec![0, 2]).is_err());
        assert!(Mask::new(2, 1, vec![0, 1]).is_ok());
    }

    #[test]
    fn complement_is_an_involution() {
        let m = Mask::new(3, 1, vec![1, 0, 1]).unwrap();
        assert_eq!(m.complement().data(), &[0, 1, 0]);
        assert_eq!(m.complement().complement(), m);
    }

    #[test]
    fn subset_and_intersection() {
        let a = Mask::new(3, 1, vec![1, 1, 0]).unwrap();
        let b = Mask::new(3, 1, vec![0, 1, 1]).unwrap();
        let ab = a.and(&b);
        assert_eq!(ab.data(), &[0, 1, 0]);
        assert!(ab.is_subset_of(&a) && ab.is_subset_of(&b));
        assert!(!a.is_subset_of(&b));
    }

    #[test]
    fn channel_conversion() {
        let g = ImageBuffer::new(1, 1, 1, vec![0.25]).unwrap();
        assert_eq!(g.with_channels(3).data(), &[0.25, 0.25, 0.25]);
        let rgb = ImageBuffer::new(1, 1, 3, vec![1.0, 0.0, 0.0]).unwrap();
        assert!((rgb.with_channels(1).data()[0] - 0.299).abs() < 1e-6);
    }
}
