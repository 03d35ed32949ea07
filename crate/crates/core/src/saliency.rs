//! Center-surround saliency and the deterministic pixel ranking consumed by
//! the salient scanners.
//!
//! For each surround radius `r` the contrast at pixel `p` is
//! `|I(p) - mean(I over the (2r+1)^2 box around p)|`, with the box clipped to
//! the image. Exactly one of the on-center / off-center responses is nonzero
//! per pixel and scale, so their sum is the absolute difference. Contrasts are
//! summed over scales and normalized by the global maximum.

use crate::error::{Error, Result};
use crate::image::{GrayImage, IntegralImage, PixelCoord};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaliencyConfig {
    surround_radii: Vec<usize>,
}

impl SaliencyConfig {
    pub fn new(mut radii: Vec<usize>) -> Result<Self> {
        if radii.is_empty() || radii.contains(&0) {
            return Err(Error::config("saliency needs at least one radius, all >= 1"));
        }
        radii.sort_unstable();
        radii.dedup();
        Ok(SaliencyConfig {
            surround_radii: radii,
        })
    }

    /// Three dyadic surrounds: `min(H, W) / 8`, `/ 4`, `/ 2`, floored to at
    /// least 1 with duplicates removed.
    pub fn for_dims(height: usize, width: usize) -> Self {
        let m = height.min(width);
        let mut radii: Vec<usize> = [m / 8, m / 4, m / 2].iter().map(|&r| r.max(1)).collect();
        radii.dedup();
        SaliencyConfig {
            surround_radii: radii,
        }
    }

    pub fn radii(&self) -> &[usize] {
        &self.surround_radii
    }
}

/// Per-pixel saliency in `[0, 1]`; the maximum is exactly 1 unless the map is
/// identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl SaliencyMap {
    /// Builds a map from arbitrary values in `[0, 1]`, e.g. a hand-made guide.
    pub fn from_values(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        let gray = GrayImage::new(height, width, values)?;
        Ok(SaliencyMap {
            height,
            width,
            values: gray.values().to_vec(),
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

    /// Exports as a gray image (`round(v * 255)`, halves up).
    pub fn to_gray(&self) -> GrayImage {
        GrayImage::new(self.height, self.width, self.values.clone())
            .expect("saliency values are in [0, 1]")
    }

    pub fn rank_pixels(&self) -> PixelRanking {
        rank_pixels(self)
    }
}

/// Unnormalized center-surround contrast summed over all radii.
pub fn raw_saliency(image: &GrayImage, config: &SaliencyConfig) -> Vec<f64> {
    let (h, w) = (image.height(), image.width());
    // offsetting by one pixel's value keeps constant regions exactly zero
    let reference = image.values()[0];
    let shifted: Vec<f64> = image.values().iter().map(|v| v - reference).collect();
    let integral = IntegralImage::build(h, w, &shifted);
    let mut raw = vec![0.0; h * w];
    for row in 0..h {
        for col in 0..w {
            let p = PixelCoord::new(row, col);
            let center = shifted[p.linear(w)];
            raw[p.linear(w)] = config
                .radii()
                .iter()
                .map(|&r| (center - integral.box_mean(p, r)).abs())
                .sum();
        }
    }
    raw
}

pub fn compute_saliency(image: &GrayImage, config: &SaliencyConfig) -> Result<SaliencyMap> {
    if image.height() < 2 || image.width() < 2 {
        return Err(Error::config(format!(
            "saliency needs an image of at least 2x2, got {}x{}",
            image.height(),
            image.width()
        )));
    }
    let mut values = raw_saliency(image, config);
    let max = values.iter().copied().fold(0.0f64, f64::max);
    if max > 0.0 {
        for v in &mut values {
            *v /= max;
        }
    } else {
        values.iter_mut().for_each(|v| *v = 0.0);
    }
    Ok(SaliencyMap {
        height: image.height(),
        width: image.width(),
        values,
    })
}

/// All pixel coordinates ordered by descending saliency; ties keep ascending
/// row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelRanking {
    width: usize,
    order: Vec<PixelCoord>,
}

impl PixelRanking {
    pub fn as_slice(&self) -> &[PixelCoord] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Entry `i`, wrapping around once the ranking is exhausted.
    pub fn cyclic(&self, i: usize) -> PixelCoord {
        self.order[i % self.order.len()]
    }

    pub fn width(&self) -> usize {
        self.width
    }
}

pub fn rank_pixels(map: &SaliencyMap) -> PixelRanking {
    let mut idx: Vec<usize> = (0..map.values.len()).collect();
    // stable sort keeps row-major order among equal values
    idx.sort_by(|&a, &b| map.values[b].total_cmp(&map.values[a]));
    PixelRanking {
        width: map.width,
        order: idx
            .into_iter()
            .map(|i| PixelCoord::from_linear(i, map.width))
            .collect(),
    }
}
