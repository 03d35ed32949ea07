//! The `.dsa` patch sequence container, format version 1.
//!
//! ```text
//! offset  size             field
//! 0       4                magic "DSA1"
//! 4       4                header length L, u32 little-endian
//! 8       L                header: UTF-8 JSON, keys sorted, no whitespace
//! 8+L     N * (12 + P*P*C) records:
//!                            center_row      i32 LE
//!                            center_col      i32 LE
//!                            position_index  u32 LE  (= row * width + col + 1)
//!                            pixels          P*P*C bytes, row-major, interleaved
//! ```
//!
//! Header keys: `channels`, `format_version`, `image_height`, `image_id`,
//! `image_width`, `num_patches`, `patch_size`, `resolved_seed` (null for
//! variants without randomness), `seed_policy` (object with `kind` =
//! `stochastic` | `fixed-per-image`, `global_seed`, and `scan_index` for
//! stochastic), `variant` (`rp`, `rt`, `sp`, `st`, `systematic`).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::PixelCoord;
use crate::scan::{position_index, Patch, PatchSequence, ScanConfig, ScanVariant, SeedPolicy};

pub const MAGIC: &[u8; 4] = b"DSA1";
pub const FORMAT_VERSION: u32 = 1;
const RECORD_PREFIX: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceHeader {
    pub channels: usize,
    pub format_version: u32,
    pub image_height: usize,
    pub image_id: String,
    pub image_width: usize,
    pub num_patches: usize,
    pub patch_size: usize,
    pub resolved_seed: Option<u64>,
    pub seed_policy: SeedPolicy,
    pub variant: ScanVariant,
}

impl SequenceHeader {
    pub fn of(seq: &PatchSequence) -> Self {
        SequenceHeader {
            channels: seq.channels,
            format_version: FORMAT_VERSION,
            image_height: seq.image_height,
            image_id: seq.image_id.clone(),
            image_width: seq.image_width,
            num_patches: seq.patches.len(),
            patch_size: seq.config.patch_size,
            resolved_seed: seq.resolved_seed,
            seed_policy: seq.config.seed_policy,
            variant: seq.config.variant,
        }
    }

    pub fn record_len(&self) -> usize {
        RECORD_PREFIX + self.patch_size * self.patch_size * self.channels
    }

    fn config(&self) -> ScanConfig {
        ScanConfig::new(self.variant, self.patch_size, self.num_patches)
            .with_seed_policy(self.seed_policy)
    }

    fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Schema(format!(
                "unsupported format_version {}",
                self.format_version
            )));
        }
        if self.channels != 1 && self.channels != 3 {
            return Err(Error::Schema(format!("channels must be 1 or 3, got {}", self.channels)));
        }
        if self.image_height == 0 || self.image_width == 0 {
            return Err(Error::Schema("image dimensions must be positive".into()));
        }
        self.config()
            .validate(self.image_height, self.image_width)
            .map_err(|e| Error::Schema(e.to_string()))
    }
}

/// Serializes a sequence. Identical sequences always produce identical bytes.
pub fn write_sequence(seq: &PatchSequence) -> Result<Vec<u8>> {
    let header = SequenceHeader::of(seq);
    header.validate()?;
    // a Value round trip sorts keys at every nesting level
    let value = serde_json::to_value(&header).map_err(|e| Error::Schema(e.to_string()))?;
    let json = serde_json::to_vec(&value).map_err(|e| Error::Schema(e.to_string()))?;
    let header_len = u32::try_from(json.len())
        .map_err(|_| Error::Schema("header longer than 4 GiB".into()))?;

    let mut out = Vec::with_capacity(8 + json.len() + seq.patches.len() * header.record_len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&header_len.to_le_bytes());
    out.extend_from_slice(&json);
    let block = header.record_len() - RECORD_PREFIX;
    for (i, patch) in seq.patches.iter().enumerate() {
        if patch.pixels.len() != block {
            return Err(Error::Schema(format!(
                "patch {i} holds {} samples, expected {block}",
                patch.pixels.len()
            )));
        }
        let expected = position_index(patch.center, seq.image_width);
        if patch.position != expected || patch.center.row >= seq.image_height || patch.center.col >= seq.image_width {
            return Err(Error::PositionMismatch {
                record: i,
                row: patch.center.row as i32,
                col: patch.center.col as i32,
                found: patch.position.value() as u32,
                expected: expected.value(),
            });
        }
        out.extend_from_slice(&(patch.center.row as i32).to_le_bytes());
        out.extend_from_slice(&(patch.center.col as i32).to_le_bytes());
        out.extend_from_slice(&(patch.position.value() as u32).to_le_bytes());
        out.extend_from_slice(&patch.pixels);
    }
    Ok(out)
}

fn le_u32(b: &[u8]) -> u32 {
    u32::from_le_bytes(b.try_into().expect("4-byte slice"))
}

/// Parses a `.dsa` file. Either the whole file is valid or an error is
/// returned; no partial sequence is ever produced.
pub fn read_sequence(bytes: &[u8]) -> Result<(PatchSequence, SequenceHeader)> {
    if bytes.len() < 8 {
        if bytes.len() >= 4 && &bytes[..4] != MAGIC {
            return Err(Error::BadMagic {
                found: bytes[..4].try_into().unwrap(),
            });
        }
        return Err(Error::Truncated(format!("{} bytes is shorter than the preamble", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::BadMagic {
            found: bytes[..4].try_into().unwrap(),
        });
    }
    let header_len = le_u32(&bytes[4..8]) as usize;
    let body = &bytes[8..];
    if body.len() < header_len {
        return Err(Error::Truncated(format!(
            "header declares {header_len} bytes, only {} present",
            body.len()
        )));
    }
    let header: SequenceHeader = serde_json::from_slice(&body[..header_len])
        .map_err(|e| Error::Schema(e.to_string()))?;
    header.validate()?;

    let records = &body[header_len..];
    let rec_len = header.record_len();
    let expected_len = header.num_patches * rec_len;
    if records.len() < expected_len {
        return Err(Error::Truncated(format!(
            "{} records of {rec_len} bytes need {expected_len} bytes, found {}",
            header.num_patches,
            records.len()
        )));
    }
    if records.len() > expected_len {
        return Err(Error::Schema(format!(
            "{} trailing bytes after {} declared records",
            records.len() - expected_len,
            header.num_patches
        )));
    }

    let mut patches = Vec::with_capacity(header.num_patches);
    for (i, rec) in records.chunks_exact(rec_len).enumerate() {
        let row = i32::from_le_bytes(rec[0..4].try_into().unwrap());
        let col = i32::from_le_bytes(rec[4..8].try_into().unwrap());
        let found = le_u32(&rec[8..12]);
        let in_bounds = row >= 0
            && col >= 0
            && (row as usize) < header.image_height
            && (col as usize) < header.image_width;
        let expected = row as i64 * header.image_width as i64 + col as i64 + 1;
        if !in_bounds || i64::from(found) != expected {
            return Err(Error::PositionMismatch {
                record: i,
                row,
                col,
                found,
                expected: expected.max(0) as u64,
            });
        }
        let center = PixelCoord::new(row as usize, col as usize);
        patches.push(Patch {
            center,
            pixels: rec[RECORD_PREFIX..].to_vec(),
            position: position_index(center, header.image_width),
        });
    }

    let seq = PatchSequence {
        patches,
        image_id: header.image_id.clone(),
        image_height: header.image_height,
        image_width: header.image_width,
        channels: header.channels,
        config: header.config(),
        resolved_seed: header.resolved_seed,
    };
    Ok((seq, header))
}

pub fn write_sequence_file(path: impl AsRef<Path>, seq: &PatchSequence) -> Result<()> {
    let path = path.as_ref();
    let bytes = write_sequence(seq)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_sequence_file(path: impl AsRef<Path>) -> Result<(PatchSequence, SequenceHeader)> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_sequence(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Image;
    use crate::scan::scan;

    fn sample(variant: ScanVariant, n: usize) -> PatchSequence {
        let s = (0..12 * 10 * 3).map(|i| (i * 13 % 256) as u8).collect();
        let img = Image::new(12, 10, 3, s).unwrap();
        let cfg = ScanConfig::new(variant, 3, n).with_seed_policy(SeedPolicy::Stochastic {
            global_seed: 5,
            scan_index: 2,
        });
        scan(&img, "sample-01", &cfg).unwrap()
    }

    #[test]
    fn round_trip_and_size() {
        for (variant, n) in [
            (ScanVariant::RandomPatches, 17),
            (ScanVariant::RandomTracing, 30),
            (ScanVariant::SalientPatches, 5),
            (ScanVariant::SalientTracing, 9),
            (ScanVariant::Systematic, 16),
        ] {
            let seq = sample(variant, n);
            let bytes = write_sequence(&seq).unwrap();
            let header_len = le_u32(&bytes[4..8]) as usize;
            assert_eq!(bytes.len(), 8 + header_len + n * (12 + 27));
            assert_eq!(write_sequence(&seq).unwrap(), bytes);
            let (back, header) = read_sequence(&bytes).unwrap();
            assert_eq!(back, seq);
            assert_eq!(header.num_patches, n);
        }
    }

    #[test]
    fn header_is_sorted_compact_json() {
        let bytes = write_sequence(&sample(ScanVariant::RandomPatches, 2)).unwrap();
        let len = le_u32(&bytes[4..8]) as usize;
        let json = std::str::from_utf8(&bytes[8..8 + len]).unwrap();
        assert!(!json.contains(' '));
        let resolved = sample(ScanVariant::RandomPatches, 2).resolved_seed.unwrap();
        assert_eq!(
            json,
            format!(
                concat!(
                    r#"{{"channels":3,"format_version":1,"image_height":12,"image_id":"sample-01","#,
                    r#""image_width":10,"num_patches":2,"patch_size":3,"resolved_seed":{},"#,
                    r#""seed_policy":{{"global_seed":5,"kind":"stochastic","scan_index":2}},"variant":"rp"}}"#
                ),
                resolved
            )
        );
    }

    #[test]
    fn bad_magic() {
        let mut bytes = write_sequence(&sample(ScanVariant::RandomPatches, 2)).unwrap();
        bytes[..4].copy_from_slice(b"DSB1");
        assert!(matches!(read_sequence(&bytes), Err(Error::BadMagic { .. })));
    }

    #[test]
    fn truncated_records() {
        let bytes = write_sequence(&sample(ScanVariant::RandomPatches, 4)).unwrap();
        assert!(matches!(read_sequence(&bytes[..bytes.len() - 1]), Err(Error::Truncated(_))));
        assert!(matches!(read_sequence(&bytes[..6]), Err(Error::Truncated(_))));
        assert!(matches!(read_sequence(&bytes[..20]), Err(Error::Truncated(_))));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(read_sequence(&extra), Err(Error::Schema(_))));
    }

    #[test]
    fn position_mismatch() {
        let seq = sample(ScanVariant::RandomPatches, 3);
        let mut bytes = write_sequence(&seq).unwrap();
        let len = le_u32(&bytes[4..8]) as usize;
        let pos = 8 + len + 8;
        let bumped = le_u32(&bytes[pos..pos + 4]) + 1;
        bytes[pos..pos + 4].copy_from_slice(&bumped.to_le_bytes());
        assert!(matches!(
            read_sequence(&bytes),
            Err(Error::PositionMismatch { record: 0, .. })
        ));
    }

    fn with_header(json: &str, records: &[u8]) -> Vec<u8> {
        let mut out = MAGIC.to_vec();
        out.extend_from_slice(&(json.len() as u32).to_le_bytes());
        out.extend_from_slice(json.as_bytes());
        out.extend_from_slice(records);
        out
    }

    #[test]
    fn schema_violations() {
        let good = r#"{"channels":1,"format_version":1,"image_height":4,"image_id":"a","image_width":4,"num_patches":1,"patch_size":1,"resolved_seed":null,"seed_policy":{"global_seed":0,"kind":"fixed-per-image"},"variant":"sp"}"#;
        let record = [0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 9];
        assert!(read_sequence(&with_header(good, &record)).is_ok());
        for bad in [
            good.replace(r#""channels":1,"#, ""),
            good.replace(r#""variant":"sp""#, r#""variant":"zz""#),
            good.replace(r#""format_version":1"#, r#""format_version":2"#),
            good.replace(r#""patch_size":1"#, r#""patch_size":2"#),
            good.replace(r#""image_id":"a""#, r#""image_id":"a","extra":1"#),
            "not json".to_string(),
        ] {
            assert!(
                matches!(read_sequence(&with_header(&bad, &record)), Err(Error::Schema(_))),
                "{bad}"
            );
        }
    }
}
