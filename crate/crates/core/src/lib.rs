//! Dynamic patch scanning for vision transformer inputs.
//!
//! Instead of cutting an image into a fixed raster grid of patches, a scanner
//! picks patch centers either uniformly at random ([`ScanVariant::RandomPatches`]),
//! along random rays ([`ScanVariant::RandomTracing`]), in descending order of a
//! center-surround saliency map ([`ScanVariant::SalientPatches`]), or along rays
//! joining consecutive salient pixels ([`ScanVariant::SalientTracing`]). The
//! systematic grid ([`ScanVariant::Systematic`]) is kept as the baseline.
//!
//! Every patch is tagged with a position index derived from its center pixel
//! (row-major, shifted by one so that index 0 stays free for a class token).
//!
//! The crate also provides:
//! - PNM (P5/P6) codecs and integral images ([`image`]),
//! - the saliency map and pixel ranking ([`saliency`]),
//! - frequency maps, coverage statistics, an exact coverage expectation for
//!   random patches, and the coverage ablation sweep ([`analysis`]),
//! - the `.dsa` sequence container ([`seqio`]).
//!
//! With the default `parallel` feature, batch work (ablation sweeps, batch
//! scanning) runs on rayon; without it the same code runs sequentially and
//! produces identical results.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod exec;
pub mod image;
pub mod saliency;
pub mod scan;
pub mod seqio;

pub use error::{Error, Result};
pub use exec::Execution;
pub use image::{GrayImage, Image, IntegralImage, PixelCoord};
pub use saliency::{PixelRanking, SaliencyConfig, SaliencyMap};
pub use scan::{
    Patch, PatchSequence, PositionIndex, ScanConfig, ScanVariant, SeedContext, SeedPolicy,
};
