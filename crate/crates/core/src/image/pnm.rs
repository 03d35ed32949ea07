//! Binary PGM (`P5`) and PPM (`P6`) codecs, maxval 255 only.
//!
//! The encoder always emits the canonical form `P5\n<w> <h>\n255\n<body>`
//! (or `P6`), so output is byte-identical across platforms. The decoder
//! accepts any whitespace and `#` comments in the header.

use std::path::Path;

use super::Image;
use crate::error::{Error, Result};

pub fn encode_pnm(image: &Image) -> Vec<u8> {
    let magic = if image.channels() == 1 { "P5" } else { "P6" };
    let header = format!("{magic}\n{} {}\n255\n", image.width(), image.height());
    let mut out = Vec::with_capacity(header.len() + image.samples().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(image.samples());
    out
}

pub fn decode_pnm(bytes: &[u8]) -> Result<Image> {
    let mut cursor = HeaderCursor { bytes, pos: 0 };
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => {
            return Err(Error::Decode {
                field: "magic",
                reason: "expected P5 or P6".into(),
            })
        }
    };
    cursor.pos = 2;
    let width = cursor.number("width")?;
    let height = cursor.number("height")?;
    let maxval = cursor.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Decode {
            field: if width == 0 { "width" } else { "height" },
            reason: "must be positive".into(),
        });
    }
    if maxval != 255 {
        return Err(Error::Decode {
            field: "maxval",
            reason: format!("unsupported maxval {maxval}, only 255 is accepted"),
        });
    }
    // exactly one whitespace byte separates the header from the body
    match bytes.get(cursor.pos) {
        Some(b) if b.is_ascii_whitespace() => cursor.pos += 1,
        _ => {
            return Err(Error::Decode {
                field: "maxval",
                reason: "missing whitespace before raster body".into(),
            })
        }
    }
    let len = height
        .checked_mul(width)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::Decode {
            field: "width",
            reason: "image dimensions overflow".into(),
        })?;
    let body = &bytes[cursor.pos..];
    if body.len() < len {
        return Err(Error::Decode {
            field: "body",
            reason: format!("truncated body: expected {len} bytes, found {}", body.len()),
        });
    }
    Image::new(height, width, channels, body[..len].to_vec())
}

pub fn read_pnm(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pnm(&bytes)
}

pub fn write_pnm(path: impl AsRef<Path>, image: &Image) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_pnm(image)).map_err(|e| Error::io(path, e))
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, field: &'static str) -> Result<usize> {
        let start = self.pos;
        self.skip_whitespace_and_comments();
        if self.pos == start {
            return Err(Error::Decode {
                field,
                reason: "expected whitespace before value".into(),
            });
        }
        let digits_start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if self.pos == digits_start {
            return Err(Error::Decode {
                field,
                reason: "missing or non-numeric value".into(),
            });
        }
        std::str::from_utf8(&self.bytes[digits_start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Decode {
                field,
                reason: "value out of range".into(),
            })
    }
}
