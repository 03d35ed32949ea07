//! Frequency maps, coverage statistics, and the coverage ablation sweep.

mod ablation;
mod coverage;

pub use ablation::{ablation_sweep, rows_to_csv, AblationRow, AblationSpec, CorpusImage, CSV_HEADER};
pub use coverage::{axis_cover_counts, expected_coverage_rp};

use crate::error::{Error, Result};
use crate::image::{quantize_unit, Image, PixelCoord, Window};
use crate::scan::PatchSequence;

/// Number of patch windows covering each pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyMap {
    height: usize,
    width: usize,
    counts: Vec<u32>,
}

impl FrequencyMap {
    pub fn new(height: usize, width: usize, counts: Vec<u32>) -> Result<Self> {
        if counts.len() != height * width {
            return Err(Error::config(format!(
                "frequency map needs {} counts, got {}",
                height * width,
                counts.len()
            )));
        }
        Ok(FrequencyMap {
            height,
            width,
            counts,
        })
    }

    /// Accumulates the clamped windows of side `patch_size` around `centers`.
    pub fn from_centers(
        centers: impl IntoIterator<Item = PixelCoord>,
        patch_size: usize,
        height: usize,
        width: usize,
    ) -> Self {
        let mut counts = vec![0u32; height * width];
        for center in centers {
            let win = Window::around(center, patch_size, height, width);
            for r in win.rows() {
                for c in &mut counts[r * width + win.left..r * width + win.left + patch_size] {
                    *c += 1;
                }
            }
        }
        FrequencyMap {
            height,
            width,
            counts,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn get(&self, p: PixelCoord) -> u32 {
        self.counts[p.linear(self.width)]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }

    pub fn max_count(&self) -> u32 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    pub fn coverage(&self) -> CoverageStats {
        coverage_fraction(self)
    }

    /// Gray image of counts scaled so the largest count maps to 255.
    pub fn to_image(&self) -> Image {
        let cap = f64::from(self.max_count().max(1));
        let samples = self
            .counts
            .iter()
            .map(|&c| quantize_unit(f64::from(c) / cap))
            .collect();
        Image::new(self.height, self.width, 1, samples).expect("dimensions are positive")
    }
}

pub fn frequency_map(seq: &PatchSequence) -> FrequencyMap {
    FrequencyMap::from_centers(
        seq.centers(),
        seq.config.patch_size,
        seq.image_height,
        seq.image_width,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageStats {
    pub covered_pixels: usize,
    pub total_pixels: usize,
    pub fraction: f64,
}

pub fn coverage_fraction(map: &FrequencyMap) -> CoverageStats {
    let covered = map.counts.iter().filter(|&&c| c > 0).count();
    let total = map.counts.len();
    CoverageStats {
        covered_pixels: covered,
        total_pixels: total,
        fraction: covered as f64 / total as f64,
    }
}

/// Blends the normalized frequency map over an image:
/// `round(0.5 * original + 0.5 * 255 * count / max_count)` on every channel.
pub fn overlay(map: &FrequencyMap, image: &Image) -> Result<Image> {
    if map.height != image.height() || map.width != image.width() {
        return Err(Error::DimensionMismatch {
            expected_h: image.height(),
            expected_w: image.width(),
            found_h: map.height,
            found_w: map.width,
        });
    }
    let cap = map.max_count().max(1);
    let channels = image.channels();
    let samples = image
        .samples()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let count = map.counts[i / channels].min(cap);
            let heat = 255.0 * f64::from(count) / f64::from(cap);
            (0.5 * f64::from(v) + 0.5 * heat + 0.5).floor().clamp(0.0, 255.0) as u8
        })
        .collect();
    Image::new(image.height(), image.width(), channels, samples)
}
