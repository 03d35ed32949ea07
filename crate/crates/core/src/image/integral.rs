use super::PixelCoord;

/// Summed-area table with one extra leading row and column of zeros.
///
/// `at(i, j)` is the sum of source values over rows `< i` and columns `< j`,
/// so any rectangle sum costs four lookups.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralImage {
    height: usize,
    width: usize,
    table: Vec<f64>,
}

impl IntegralImage {
    pub(crate) fn build(height: usize, width: usize, values: &[f64]) -> Self {
        let stride = width + 1;
        let mut table = vec![0.0; (height + 1) * stride];
        for r in 0..height {
            let mut row_sum = 0.0;
            for c in 0..width {
                row_sum += values[r * width + c];
                table[(r + 1) * stride + c + 1] = table[r * stride + c + 1] + row_sum;
            }
        }
        IntegralImage {
            height,
            width,
            table,
        }
    }

    /// Height of the source image.
    pub fn height(&self) -> usize {
        self.height
    }

    /// Width of the source image.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.table[i * (self.width + 1) + j]
    }

    /// Sum over the half-open rectangle `rows x cols` of the source image.
    pub fn rect_sum(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> f64 {
        self.at(rows.end, cols.end) - self.at(rows.start, cols.end) - self.at(rows.end, cols.start)
            + self.at(rows.start, cols.start)
    }

    /// Mean over the square window of the given radius around `center`,
    /// intersected with the image. The divisor is the intersected area.
    pub fn box_mean(&self, center: PixelCoord, radius: usize) -> f64 {
        let rows = center.row.saturating_sub(radius)..(center.row + radius + 1).min(self.height);
        let cols = center.col.saturating_sub(radius)..(center.col + radius + 1).min(self.width);
        let area = (rows.len() * cols.len()) as f64;
        self.rect_sum(rows, cols) / area
    }
}
