//! Patch scanners: random patches, random tracing, salient patches, salient
//! tracing, and the systematic grid baseline.
//!
//! Scanning happens in two steps. A variant first chooses the ordered list of
//! patch centers (see [`centers`]); the sequence is then materialized by
//! cropping the clamped window around each center and attaching its position
//! index. Analysis code that only needs coverage works on the centers directly.

mod line;
mod seed;

pub use line::{trace_line, Line};
pub use seed::{derive_scan_seed, fnv1a64, mix64, resolve_seed, SeedContext, SeedPolicy};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{Image, PixelCoord};
use crate::saliency::{compute_saliency, PixelRanking, SaliencyConfig, SaliencyMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScanVariant {
    #[serde(rename = "rp")]
    RandomPatches,
    #[serde(rename = "rt")]
    RandomTracing,
    #[serde(rename = "sp")]
    SalientPatches,
    #[serde(rename = "st")]
    SalientTracing,
    #[serde(rename = "systematic")]
    Systematic,
}

impl ScanVariant {
    pub const ALL: [ScanVariant; 5] = [
        ScanVariant::RandomPatches,
        ScanVariant::RandomTracing,
        ScanVariant::SalientPatches,
        ScanVariant::SalientTracing,
        ScanVariant::Systematic,
    ];

    pub const DYNAMIC: [ScanVariant; 4] = [
        ScanVariant::RandomPatches,
        ScanVariant::RandomTracing,
        ScanVariant::SalientPatches,
        ScanVariant::SalientTracing,
    ];

    /// Short name used on the command line, in CSV rows and in file headers.
    pub fn token(self) -> &'static str {
        match self {
            ScanVariant::RandomPatches => "rp",
            ScanVariant::RandomTracing => "rt",
            ScanVariant::SalientPatches => "sp",
            ScanVariant::SalientTracing => "st",
            ScanVariant::Systematic => "systematic",
        }
    }

    /// Whether the variant consumes a random stream.
    pub fn is_random(self) -> bool {
        matches!(self, ScanVariant::RandomPatches | ScanVariant::RandomTracing)
    }

    /// Whether the variant needs a saliency map.
    pub fn is_salient(self) -> bool {
        matches!(self, ScanVariant::SalientPatches | ScanVariant::SalientTracing)
    }
}

impl fmt::Display for ScanVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for ScanVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScanVariant::ALL
            .into_iter()
            .find(|v| v.token() == s)
            .ok_or_else(|| Error::config(format!("unknown variant {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScanConfig {
    pub variant: ScanVariant,
    pub patch_size: usize,
    pub num_patches: usize,
    pub seed_policy: SeedPolicy,
}

impl ScanConfig {
    pub fn new(variant: ScanVariant, patch_size: usize, num_patches: usize) -> Self {
        ScanConfig {
            variant,
            patch_size,
            num_patches,
            seed_policy: SeedPolicy::default(),
        }
    }

    pub fn with_seed_policy(mut self, policy: SeedPolicy) -> Self {
        self.seed_policy = policy;
        self
    }

    /// Checks the configuration against an image of the given size.
    pub fn validate(&self, height: usize, width: usize) -> Result<()> {
        if self.patch_size == 0 || self.patch_size.is_multiple_of(2) {
            return Err(Error::config(format!(
                "patch size must be a positive odd number, got {}",
                self.patch_size
            )));
        }
        if self.patch_size > height.min(width) {
            return Err(Error::config(format!(
                "patch size {} exceeds image dimensions {height}x{width}",
                self.patch_size
            )));
        }
        if self.num_patches == 0 {
            return Err(Error::config("number of patches must be at least 1"));
        }
        if (height * width) as u64 > u64::from(u32::MAX - 1) {
            return Err(Error::config("image too large for 32-bit position indices"));
        }
        if self.variant == ScanVariant::Systematic {
            let grid = grid_num_patches(height, width, self.patch_size);
            if self.num_patches != grid {
                return Err(Error::config(format!(
                    "systematic scan of a {height}x{width} image with patch size {} has {grid} patches, got {}",
                    self.patch_size, self.num_patches
                )));
            }
        }
        Ok(())
    }

    fn expect_variant(&self, variant: ScanVariant) -> Result<()> {
        if self.variant != variant {
            return Err(Error::config(format!(
                "configuration is for {}, not {variant}",
                self.variant
            )));
        }
        Ok(())
    }
}

/// Row-major position of a patch center plus one; 0 is left for the class token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PositionIndex(pub u64);

impl PositionIndex {
    pub const CLASS_TOKEN: PositionIndex = PositionIndex(0);

    pub fn value(self) -> u64 {
        self.0
    }
}

pub fn position_index(center: PixelCoord, width: usize) -> PositionIndex {
    PositionIndex((center.row * width + center.col) as u64 + 1)
}

/// Patch count of the systematic grid on a square `image_size` image: `ceil(S/P)^2`.
pub fn default_num_patches(image_size: usize, patch_size: usize) -> usize {
    let per_axis = image_size.div_ceil(patch_size);
    per_axis * per_axis
}

/// Patch count of the systematic grid on an arbitrary image.
pub fn grid_num_patches(height: usize, width: usize, patch_size: usize) -> usize {
    height.div_ceil(patch_size) * width.div_ceil(patch_size)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Patch {
    /// Requested center, before window clamping.
    pub center: PixelCoord,
    /// `P * P * C` samples of the clamped window.
    pub pixels: Vec<u8>,
    pub position: PositionIndex,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchSequence {
    pub patches: Vec<Patch>,
    pub image_id: String,
    pub image_height: usize,
    pub image_width: usize,
    pub channels: usize,
    pub config: ScanConfig,
    /// `None` for variants that draw no random numbers.
    pub resolved_seed: Option<u64>,
}

impl PatchSequence {
    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    pub fn centers(&self) -> impl Iterator<Item = PixelCoord> + '_ {
        self.patches.iter().map(|p| p.center)
    }

    fn from_centers(
        image: &Image,
        image_id: &str,
        config: &ScanConfig,
        resolved_seed: Option<u64>,
        centers: Vec<PixelCoord>,
    ) -> Result<Self> {
        let patches = centers
            .into_iter()
            .map(|center| {
                Ok(Patch {
                    center,
                    pixels: image.crop_patch(center, config.patch_size)?,
                    position: position_index(center, image.width()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PatchSequence {
            patches,
            image_id: image_id.to_owned(),
            image_height: image.height(),
            image_width: image.width(),
            channels: image.channels(),
            config: *config,
            resolved_seed,
        })
    }
}

/// Where a variant gets its center choices from.
pub enum Guide<'a> {
    Random(&'a mut SeedContext),
    Ranking(&'a PixelRanking),
    Grid,
}

fn draw_pixel(rng: &mut SeedContext, height: usize, width: usize) -> PixelCoord {
    PixelCoord::from_linear(rng.below((height * width) as u64) as usize, width)
}

/// Ordered patch centers for `config` on a `height` x `width` image.
///
/// The configuration is validated first; the guide must match the variant
/// (a random stream for RP/RT, a ranking for SP/ST, `Grid` for systematic).
pub fn centers(
    config: &ScanConfig,
    height: usize,
    width: usize,
    guide: Guide<'_>,
) -> Result<Vec<PixelCoord>> {
    config.validate(height, width)?;
    let n = config.num_patches;
    let p = config.patch_size;
    let mut out = Vec::with_capacity(n + height.max(width));
    match (config.variant, guide) {
        (ScanVariant::RandomPatches, Guide::Random(rng)) => {
            out.extend((0..n).map(|_| draw_pixel(rng, height, width)));
        }
        (ScanVariant::RandomTracing, Guide::Random(rng)) => {
            while out.len() < n {
                let a = draw_pixel(rng, height, width);
                let b = draw_pixel(rng, height, width);
                out.extend(Line::new(a, b));
            }
        }
        (ScanVariant::SalientPatches, Guide::Ranking(rank)) => {
            check_ranking(rank, height, width)?;
            out.extend((0..n).map(|i| rank.cyclic(i)));
        }
        (ScanVariant::SalientTracing, Guide::Ranking(rank)) => {
            check_ranking(rank, height, width)?;
            let mut count = 0;
            while out.len() < n {
                out.extend(Line::new(rank.cyclic(count), rank.cyclic(count + 1)));
                count += 1;
            }
        }
        (ScanVariant::Systematic, Guide::Grid) => {
            for i in 0..height.div_ceil(p) {
                let top = (i * p).min(height - p);
                for j in 0..width.div_ceil(p) {
                    let left = (j * p).min(width - p);
                    out.push(PixelCoord::new(top + p / 2, left + p / 2));
                }
            }
        }
        (variant, _) => {
            return Err(Error::config(format!(
                "guide does not match variant {variant}"
            )))
        }
    }
    out.truncate(n);
    Ok(out)
}

fn check_ranking(rank: &PixelRanking, height: usize, width: usize) -> Result<()> {
    if rank.len() != height * width || rank.width() != width {
        return Err(Error::DimensionMismatch {
            expected_h: height,
            expected_w: width,
            found_h: rank.len() / rank.width().max(1),
            found_w: rank.width(),
        });
    }
    Ok(())
}

fn check_map(image: &Image, map: &SaliencyMap) -> Result<()> {
    if map.height() != image.height() || map.width() != image.width() {
        return Err(Error::DimensionMismatch {
            expected_h: image.height(),
            expected_w: image.width(),
            found_h: map.height(),
            found_w: map.width(),
        });
    }
    Ok(())
}

/// Uniformly random centers over the whole pixel grid, in draw order.
pub fn scan_random_patches(
    image: &Image,
    image_id: &str,
    config: &ScanConfig,
    seed: &mut SeedContext,
) -> Result<PatchSequence> {
    config.expect_variant(ScanVariant::RandomPatches)?;
    let resolved = seed.resolved_seed();
    let c = centers(config, image.height(), image.width(), Guide::Random(seed))?;
    PatchSequence::from_centers(image, image_id, config, Some(resolved), c)
}

/// Rays between pairs of random pixels, one patch per ray pixel, until `N`
/// patches are collected; the last ray is truncated.
pub fn scan_random_tracing(
    image: &Image,
    image_id: &str,
    config: &ScanConfig,
    seed: &mut SeedContext,
) -> Result<PatchSequence> {
    config.expect_variant(ScanVariant::RandomTracing)?;
    let resolved = seed.resolved_seed();
    let c = centers(config, image.height(), image.width(), Guide::Random(seed))?;
    PatchSequence::from_centers(image, image_id, config, Some(resolved), c)
}

/// The `N` most salient pixels in ranking order. If `N` exceeds the pixel
/// count the ranking is walked again from the top.
pub fn scan_salient_patches(
    image: &Image,
    image_id: &str,
    map: &SaliencyMap,
    config: &ScanConfig,
) -> Result<PatchSequence> {
    config.expect_variant(ScanVariant::SalientPatches)?;
    check_map(image, map)?;
    let rank = map.rank_pixels();
    let c = centers(config, image.height(), image.width(), Guide::Ranking(&rank))?;
    PatchSequence::from_centers(image, image_id, config, None, c)
}

/// Rays joining ranking entries `k` and `k + 1` for `k = 0, 1, ...`. Each
/// ray includes both endpoints, so the shared endpoint of consecutive rays
/// appears twice.
pub fn scan_salient_tracing(
    image: &Image,
    image_id: &str,
    map: &SaliencyMap,
    config: &ScanConfig,
) -> Result<PatchSequence> {
    config.expect_variant(ScanVariant::SalientTracing)?;
    check_map(image, map)?;
    let rank = map.rank_pixels();
    let c = centers(config, image.height(), image.width(), Guide::Ranking(&rank))?;
    PatchSequence::from_centers(image, image_id, config, None, c)
}

/// Non-overlapping raster grid; the last row/column of windows is shifted
/// inward when `P` does not divide the image.
pub fn scan_systematic(image: &Image, image_id: &str, config: &ScanConfig) -> Result<PatchSequence> {
    config.expect_variant(ScanVariant::Systematic)?;
    let c = centers(config, image.height(), image.width(), Guide::Grid)?;
    PatchSequence::from_centers(image, image_id, config, None, c)
}

/// Runs any variant, deriving the seed from the config's policy and computing
/// the saliency map when needed.
pub fn scan(image: &Image, image_id: &str, config: &ScanConfig) -> Result<PatchSequence> {
    scan_with_map(image, image_id, config, None)
}

/// Like [`scan`] but reuses a precomputed saliency map when one is given.
pub fn scan_with_map(
    image: &Image,
    image_id: &str,
    config: &ScanConfig,
    map: Option<&SaliencyMap>,
) -> Result<PatchSequence> {
    config.validate(image.height(), image.width())?;
    match config.variant {
        ScanVariant::RandomPatches => {
            let mut seed = SeedContext::derive(&config.seed_policy, image_id.as_bytes());
            scan_random_patches(image, image_id, config, &mut seed)
        }
        ScanVariant::RandomTracing => {
            let mut seed = SeedContext::derive(&config.seed_policy, image_id.as_bytes());
            scan_random_tracing(image, image_id, config, &mut seed)
        }
        ScanVariant::SalientPatches | ScanVariant::SalientTracing => {
            let owned;
            let map = match map {
                Some(m) => m,
                None => {
                    owned = image_saliency(image)?;
                    &owned
                }
            };
            if config.variant == ScanVariant::SalientPatches {
                scan_salient_patches(image, image_id, map, config)
            } else {
                scan_salient_tracing(image, image_id, map, config)
            }
        }
        ScanVariant::Systematic => scan_systematic(image, image_id, config),
    }
}

/// Saliency map of an image with the default dyadic surrounds.
pub fn image_saliency(image: &Image) -> Result<SaliencyMap> {
    compute_saliency(
        &image.to_grayscale(),
        &SaliencyConfig::for_dims(image.height(), image.width()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient(h: usize, w: usize) -> Image {
        let s = (0..h * w).map(|i| (i * 7 % 251) as u8).collect();
        Image::new(h, w, 1, s).unwrap()
    }

    fn pc(r: usize, c: usize) -> PixelCoord {
        PixelCoord::new(r, c)
    }

    #[test]
    fn position_examples() {
        assert_eq!(position_index(pc(0, 0), 32).value(), 1);
        assert_eq!(position_index(pc(1, 2), 32).value(), 35);
        assert_eq!(position_index(pc(31, 31), 32).value(), 1024);
    }

    #[test]
    fn default_counts() {
        assert_eq!(default_num_patches(32, 3), 121);
        assert_eq!(default_num_patches(32, 9), 16);
        assert_eq!(default_num_patches(220, 15), 225);
        assert_eq!(default_num_patches(220, 9), 625);
        assert_eq!(grid_num_patches(6, 9, 3), 6);
    }

    #[test]
    fn variant_tokens_round_trip() {
        for v in ScanVariant::ALL {
            assert_eq!(v.token().parse::<ScanVariant>().unwrap(), v);
        }
        assert!("xx".parse::<ScanVariant>().is_err());
    }

    #[test]
    fn validation() {
        let ok = ScanConfig::new(ScanVariant::RandomPatches, 3, 10);
        assert!(ok.validate(32, 32).is_ok());
        assert!(ScanConfig::new(ScanVariant::RandomPatches, 4, 10).validate(32, 32).is_err());
        assert!(ScanConfig::new(ScanVariant::RandomPatches, 3, 0).validate(32, 32).is_err());
        assert!(ScanConfig::new(ScanVariant::RandomPatches, 5, 1).validate(4, 32).is_err());
        assert!(ScanConfig::new(ScanVariant::Systematic, 3, 120).validate(32, 32).is_err());
        assert!(ScanConfig::new(ScanVariant::Systematic, 3, 121).validate(32, 32).is_ok());
    }

    #[test]
    fn random_patches_length_and_determinism() {
        let img = gradient(32, 32);
        let cfg = ScanConfig::new(ScanVariant::RandomPatches, 3, 5);
        let a = scan_random_patches(&img, "g", &cfg, &mut SeedContext::from_seed(7)).unwrap();
        let b = scan_random_patches(&img, "g", &cfg, &mut SeedContext::from_seed(7)).unwrap();
        assert_eq!(a.len(), 5);
        assert_eq!(a, b);
        assert_eq!(a.resolved_seed, Some(7));
    }

    #[test]
    fn wrong_variant_rejected() {
        let img = gradient(8, 8);
        let cfg = ScanConfig::new(ScanVariant::RandomTracing, 3, 5);
        assert!(scan_random_patches(&img, "g", &cfg, &mut SeedContext::from_seed(1)).is_err());
        let mut rng = SeedContext::from_seed(1);
        assert!(centers(&cfg, 8, 8, Guide::Grid).is_err());
        assert!(centers(&cfg, 8, 8, Guide::Random(&mut rng)).is_ok());
    }

    #[test]
    fn random_tracing_truncates_first_ray() {
        // search for a seed whose first ray is (2,2)->(2,6) on a 10x10 image
        let (h, w) = (10usize, 10usize);
        let target = (pc(2, 2).linear(w) as u64, pc(2, 6).linear(w) as u64);
        let seed = (0u64..)
            .find(|&s| {
                let mut ctx = SeedContext::from_seed(s);
                (ctx.below((h * w) as u64), ctx.below((h * w) as u64)) == target
            })
            .unwrap();
        let img = gradient(h, w);
        let cfg = ScanConfig::new(ScanVariant::RandomTracing, 3, 4);
        let seq = scan_random_tracing(&img, "g", &cfg, &mut SeedContext::from_seed(seed)).unwrap();
        let got: Vec<_> = seq.centers().collect();
        assert_eq!(got, vec![pc(2, 2), pc(2, 3), pc(2, 4), pc(2, 5)]);
    }

    #[test]
    fn salient_tracing_two_point_map() {
        let img = gradient(10, 10);
        let mut v = vec![0.0; 100];
        v[pc(2, 2).linear(10)] = 1.0;
        v[pc(2, 6).linear(10)] = 0.9;
        let map = SaliencyMap::from_values(10, 10, v).unwrap();
        let five = ScanConfig::new(ScanVariant::SalientTracing, 3, 5);
        let seq = scan_salient_tracing(&img, "g", &map, &five).unwrap();
        let got: Vec<_> = seq.centers().collect();
        assert_eq!(got, vec![pc(2, 2), pc(2, 3), pc(2, 4), pc(2, 5), pc(2, 6)]);
        let three = ScanConfig::new(ScanVariant::SalientTracing, 3, 3);
        let seq = scan_salient_tracing(&img, "g", &map, &three).unwrap();
        let got: Vec<_> = seq.centers().collect();
        assert_eq!(got, vec![pc(2, 2), pc(2, 3), pc(2, 4)]);
    }

    #[test]
    fn salient_tracing_repeats_shared_endpoint() {
        let img = gradient(10, 10);
        let mut v = vec![0.0; 100];
        v[pc(0, 0).linear(10)] = 1.0;
        v[pc(0, 2).linear(10)] = 0.8;
        v[pc(2, 2).linear(10)] = 0.6;
        let map = SaliencyMap::from_values(10, 10, v).unwrap();
        let cfg = ScanConfig::new(ScanVariant::SalientTracing, 3, 6);
        let got: Vec<_> = scan_salient_tracing(&img, "g", &map, &cfg)
            .unwrap()
            .centers()
            .collect();
        assert_eq!(
            got,
            vec![pc(0, 0), pc(0, 1), pc(0, 2), pc(0, 2), pc(1, 2), pc(2, 2)]
        );
    }

    #[test]
    fn salient_patches_follow_ranking() {
        let img = Image::filled(12, 12, 3, 90).unwrap();
        let cfg = ScanConfig::new(ScanVariant::SalientPatches, 3, 3);
        let seq = scan(&img, "u", &cfg).unwrap();
        let got: Vec<_> = seq.centers().collect();
        assert_eq!(got, vec![pc(0, 0), pc(0, 1), pc(0, 2)]);
        assert_eq!(seq.resolved_seed, None);

        let mut s = vec![10u8; 16 * 16];
        s[pc(5, 7).linear(16)] = 250;
        let img = Image::new(16, 16, 1, s).unwrap();
        let seq = scan(&img, "b", &ScanConfig::new(ScanVariant::SalientPatches, 3, 4)).unwrap();
        assert_eq!(seq.patches[0].center, pc(5, 7));
        assert_eq!(seq, scan(&img, "b", &ScanConfig::new(ScanVariant::SalientPatches, 3, 4)).unwrap());
    }

    #[test]
    fn salient_patches_wrap_past_pixel_count() {
        let img = gradient(3, 3);
        let cfg = ScanConfig::new(ScanVariant::SalientPatches, 3, 11);
        let seq = scan(&img, "g", &cfg).unwrap();
        assert_eq!(seq.len(), 11);
        assert_eq!(seq.patches[9].center, seq.patches[0].center);
    }

    #[test]
    fn salient_map_dimension_mismatch() {
        let img = gradient(10, 10);
        let map = SaliencyMap::from_values(10, 9, vec![0.0; 90]).unwrap();
        let cfg = ScanConfig::new(ScanVariant::SalientPatches, 3, 3);
        assert!(matches!(
            scan_salient_patches(&img, "g", &map, &cfg),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn systematic_grid_windows() {
        let img = gradient(32, 32);
        let cfg = ScanConfig::new(ScanVariant::Systematic, 3, 121);
        let seq = scan(&img, "g", &cfg).unwrap();
        assert_eq!(seq.len(), 121);
        assert_eq!(seq.patches[0].center, pc(1, 1));
        assert_eq!(seq.patches[120].center, pc(30, 30));
        assert_eq!(seq.patches[10].center, pc(1, 30));
        assert_eq!(
            seq.patches[120].pixels,
            img.crop_patch(pc(31, 31), 3).unwrap()
        );
    }

    #[test]
    fn patches_match_crop_and_position() {
        let img = gradient(20, 24);
        for variant in ScanVariant::DYNAMIC {
            let cfg = ScanConfig::new(variant, 5, 40).with_seed_policy(SeedPolicy::Stochastic {
                global_seed: 3,
                scan_index: 1,
            });
            let seq = scan(&img, "g", &cfg).unwrap();
            assert_eq!(seq.len(), 40);
            for p in &seq.patches {
                assert_eq!(p.pixels, img.crop_patch(p.center, 5).unwrap());
                assert_eq!(p.position, position_index(p.center, 24));
            }
        }
    }
}
