//! Inclusive integer line rasterization between two pixels.
//!
//! Variant (frozen): step once per pixel along the major axis (columns when
//! `|dcol| >= |drow|`); after `t` major steps the minor offset is
//! `floor((2 t d_minor + d_major) / (2 d_major))`, i.e. exact midpoint rounding
//! with halves rounded away from the start point. Consecutive points are
//! 8-neighbors and both endpoints are included.

use crate::image::PixelCoord;

/// Iterator over the pixels from `start` to `end`, inclusive.
#[derive(Debug, Clone)]
pub struct Line {
    current: (i64, i64),
    major_is_col: bool,
    step: (i64, i64),
    d_major: i64,
    d_minor: i64,
    acc: i64,
    remaining: i64,
}

impl Line {
    pub fn new(start: PixelCoord, end: PixelCoord) -> Self {
        let dr = end.row as i64 - start.row as i64;
        let dc = end.col as i64 - start.col as i64;
        let major_is_col = dc.abs() >= dr.abs();
        let (d_major, d_minor) = if major_is_col {
            (dc.abs(), dr.abs())
        } else {
            (dr.abs(), dc.abs())
        };
        Line {
            current: (start.row as i64, start.col as i64),
            major_is_col,
            step: (dr.signum(), dc.signum()),
            d_major,
            d_minor,
            acc: d_major,
            remaining: d_major + 1,
        }
    }
}

impl Iterator for Line {
    type Item = PixelCoord;

    fn next(&mut self) -> Option<PixelCoord> {
        if self.remaining == 0 {
            return None;
        }
        let out = PixelCoord::new(self.current.0 as usize, self.current.1 as usize);
        self.remaining -= 1;
        if self.remaining > 0 {
            let (major, minor) = if self.major_is_col {
                (&mut self.current.1, &mut self.current.0)
            } else {
                (&mut self.current.0, &mut self.current.1)
            };
            let (major_step, minor_step) = if self.major_is_col {
                (self.step.1, self.step.0)
            } else {
                (self.step.0, self.step.1)
            };
            *major += major_step;
            self.acc += 2 * self.d_minor;
            if self.acc >= 2 * self.d_major {
                self.acc -= 2 * self.d_major;
                *minor += minor_step;
            }
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.remaining as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Line {}

pub fn trace_line(start: PixelCoord, end: PixelCoord) -> Vec<PixelCoord> {
    Line::new(start, end).collect()
}
