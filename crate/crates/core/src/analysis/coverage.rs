use crate::error::{Error, Result};
use crate::image::{PixelCoord, Window};

/// For each position along an axis of length `dim`, how many of the `dim`
/// possible center coordinates produce a clamped window covering it.
pub fn axis_cover_counts(dim: usize, patch_size: usize) -> Vec<u64> {
    let mut counts = vec![0u64; dim];
    for center in 0..dim {
        let win = Window::around(PixelCoord::new(center, 0), patch_size, dim, patch_size);
        for c in &mut counts[win.rows()] {
            *c += 1;
        }
    }
    counts
}

/// Exact expected coverage fraction of `n` random patches with centers drawn
/// uniformly over an `height` x `width` image and windows clamped inside it.
///
/// A pixel `q` is covered by `c_q` of the `H * W` centers, so it is missed by
/// all `n` draws with probability `(1 - c_q / (H W))^n`; `c_q` factorizes into
/// per-axis counts.
pub fn expected_coverage_rp(height: usize, width: usize, patch_size: usize, n: usize) -> Result<f64> {
    if patch_size == 0 || patch_size.is_multiple_of(2) || patch_size > height.min(width) {
        return Err(Error::config(format!(
            "patch size {patch_size} must be odd and fit in {height}x{width}"
        )));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let rows = axis_cover_counts(height, patch_size);
    let cols = axis_cover_counts(width, patch_size);
    let total = (height * width) as f64;
    let exponent = n as f64;
    let mut sum = 0.0;
    for &cr in &rows {
        for &cc in &cols {
            let hit = (cr * cc) as f64 / total;
            sum += 1.0 - (1.0 - hit).powf(exponent);
        }
    }
    Ok(sum / total)
}
