//! Raster images, grayscale conversion, and border-safe patch windows.

mod integral;
pub mod pnm;

pub use integral::IntegralImage;

use crate::error::{Error, Result};

/// Zero-based pixel location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PixelCoord {
    pub row: usize,
    pub col: usize,
}

impl PixelCoord {
    pub const fn new(row: usize, col: usize) -> Self {
        PixelCoord { row, col }
    }

    /// Row-major linear index in an image of the given width.
    pub fn linear(self, width: usize) -> usize {
        self.row * width + self.col
    }

    pub fn from_linear(index: usize, width: usize) -> Self {
        PixelCoord::new(index / width, index % width)
    }
}

impl From<(usize, usize)> for PixelCoord {
    fn from((row, col): (usize, usize)) -> Self {
        PixelCoord::new(row, col)
    }
}

/// 8-bit raster with 1 (gray) or 3 (RGB) interleaved channels, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    height: usize,
    width: usize,
    channels: usize,
    samples: Vec<u8>,
}

impl Image {
    pub fn new(height: usize, width: usize, channels: usize, samples: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::config(format!(
                "image dimensions must be positive, got {height}x{width}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::config(format!(
                "images must have 1 or 3 channels, got {channels}"
            )));
        }
        let expected = height * width * channels;
        if samples.len() != expected {
            return Err(Error::config(format!(
                "sample buffer holds {} values, expected {expected}",
                samples.len()
            )));
        }
        Ok(Image {
            height,
            width,
            channels,
            samples,
        })
    }

    /// An image with every sample set to `value`.
    pub fn filled(height: usize, width: usize, channels: usize, value: u8) -> Result<Self> {
        Image::new(height, width, channels, vec![value; height * width * channels])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<u8> {
        self.samples
    }

    pub fn contains(&self, p: PixelCoord) -> bool {
        p.row < self.height && p.col < self.width
    }

    /// Samples of one pixel (length = channels).
    pub fn pixel(&self, p: PixelCoord) -> &[u8] {
        let start = p.linear(self.width) * self.channels;
        &self.samples[start..start + self.channels]
    }

    pub fn pixel_mut(&mut self, p: PixelCoord) -> &mut [u8] {
        let start = p.linear(self.width) * self.channels;
        &mut self.samples[start..start + self.channels]
    }

    /// Luma intensity in `[0, 1]`.
    ///
    /// Gray samples map to `v / 255`; RGB uses `0.299 R + 0.587 G + 0.114 B`
    /// divided by 255.
    pub fn to_grayscale(&self) -> GrayImage {
        let values = match self.channels {
            1 => self.samples.iter().map(|&v| f64::from(v) / 255.0).collect(),
            _ => self
                .samples
                .chunks_exact(3)
                .map(|px| {
                    let luma = 0.299 * f64::from(px[0])
                        + 0.587 * f64::from(px[1])
                        + 0.114 * f64::from(px[2]);
                    (luma / 255.0).clamp(0.0, 1.0)
                })
                .collect(),
        };
        GrayImage {
            height: self.height,
            width: self.width,
            values,
        }
    }

    /// Checks that a square patch of side `patch_size` can be cut from this image.
    pub fn check_patch_size(&self, patch_size: usize) -> Result<()> {
        if patch_size == 0 || patch_size.is_multiple_of(2) {
            return Err(Error::config(format!(
                "patch size must be a positive odd number, got {patch_size}"
            )));
        }
        if patch_size > self.height.min(self.width) {
            return Err(Error::config(format!(
                "patch size {patch_size} exceeds image dimensions {}x{}",
                self.height, self.width
            )));
        }
        Ok(())
    }

    /// Pixel block of the clamped window around `center`, row-major and
    /// channel-interleaved (length `P * P * channels`).
    pub fn crop_patch(&self, center: PixelCoord, patch_size: usize) -> Result<Vec<u8>> {
        self.check_patch_size(patch_size)?;
        if !self.contains(center) {
            return Err(Error::config(format!(
                "patch center ({}, {}) outside {}x{} image",
                center.row, center.col, self.height, self.width
            )));
        }
        let window = Window::around(center, patch_size, self.height, self.width);
        let row_len = patch_size * self.channels;
        let mut out = Vec::with_capacity(patch_size * row_len);
        for r in window.top..window.top + patch_size {
            let start = (r * self.width + window.left) * self.channels;
            out.extend_from_slice(&self.samples[start..start + row_len]);
        }
        Ok(out)
    }
}

/// Square patch window, always fully inside the image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub top: usize,
    pub left: usize,
    pub size: usize,
}

impl Window {
    /// Window of side `size` centered on `center`, shifted (not padded) so it
    /// lies inside a `height` x `width` image: the top-left corner is
    /// `clamp(center - size/2, 0, dim - size)` per axis.
    ///
    /// Requires `size <= min(height, width)`.
    pub fn around(center: PixelCoord, size: usize, height: usize, width: usize) -> Self {
        debug_assert!(size <= height && size <= width);
        let half = size / 2;
        let top = center.row.saturating_sub(half).min(height - size);
        let left = center.col.saturating_sub(half).min(width - size);
        Window { top, left, size }
    }

    pub fn rows(&self) -> std::ops::Range<usize> {
        self.top..self.top + self.size
    }

    pub fn cols(&self) -> std::ops::Range<usize> {
        self.left..self.left + self.size
    }

    pub fn contains(&self, p: PixelCoord) -> bool {
        self.rows().contains(&p.row) && self.cols().contains(&p.col)
    }
}

/// Single-channel real-valued image with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl GrayImage {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || values.len() != height * width {
            return Err(Error::config(format!(
                "gray image needs {}x{} values, got {}",
                height,
                width,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::config(format!("gray value {v} outside [0, 1]")));
        }
        Ok(GrayImage {
            height,
            width,
            values,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, p: PixelCoord) -> f64 {
        self.values[p.linear(self.width)]
    }

    pub fn integral(&self) -> IntegralImage {
        IntegralImage::build(self.height, self.width, &self.values)
    }

    /// Quantizes to an 8-bit gray image, `round(v * 255)` with halves rounded up.
    pub fn to_image(&self) -> Image {
        let samples = self.values.iter().map(|&v| quantize_unit(v)).collect();
        Image {
            height: self.height,
            width: self.width,
            channels: 1,
            samples,
        }
    }
}

/// `floor(v * 255 + 0.5)` clamped to `0..=255`.
pub(crate) fn quantize_unit(v: f64) -> u8 {
    (v * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
}
