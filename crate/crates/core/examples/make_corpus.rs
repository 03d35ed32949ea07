//! Regenerates the bundled test corpus under `data/`.
//!
//! Ten 32x32 RGB scenes: a smooth two-tone background with mild texture and
//! one to three elliptical objects of varying size and contrast. The output is
//! a pure function of the fixed seed below.
//!
//! ```text
//! cargo run -p dynscan --example make_corpus
//! ```

use std::path::PathBuf;

use dynscan::image::pnm::write_pnm;
use dynscan::{Image, SeedContext};

const SIZE: usize = 32;
const SEED: u64 = 0x5ca7_7e12;

fn unit(rng: &mut SeedContext) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn color(rng: &mut SeedContext) -> [f64; 3] {
    [unit(rng) * 255.0, unit(rng) * 255.0, unit(rng) * 255.0]
}

struct Blob {
    row: f64,
    col: f64,
    radius_r: f64,
    radius_c: f64,
    color: [f64; 3],
    stripes: f64,
}

fn scene(rng: &mut SeedContext, size: usize) -> Image {
    let top = color(rng);
    let bottom = color(rng);
    let wave = 0.1 + unit(rng) * 0.4;
    let blobs: Vec<Blob> = (0..1 + rng.below(3))
        .map(|_| {
            let scale = 0.08 + unit(rng) * 0.35;
            Blob {
                row: unit(rng) * size as f64,
                col: unit(rng) * size as f64,
                radius_r: size as f64 * scale * (0.6 + unit(rng) * 0.8),
                radius_c: size as f64 * scale * (0.6 + unit(rng) * 0.8),
                color: color(rng),
                stripes: if unit(rng) < 0.4 { 0.5 + unit(rng) } else { 0.0 },
            }
        })
        .collect();

    let mut samples = Vec::with_capacity(size * size * 3);
    for r in 0..size {
        for c in 0..size {
            let t = r as f64 / (size - 1) as f64;
            let ripple = 12.0 * (wave * c as f64 + 0.3 * r as f64).sin();
            let mut px: [f64; 3] = std::array::from_fn(|k| top[k] * (1.0 - t) + bottom[k] * t + ripple);
            for b in &blobs {
                let dr = (r as f64 - b.row) / b.radius_r;
                let dc = (c as f64 - b.col) / b.radius_c;
                if dr * dr + dc * dc <= 1.0 {
                    let shade = if b.stripes > 0.0 && ((r + c) as f64 * b.stripes).sin() > 0.0 {
                        0.6
                    } else {
                        1.0
                    };
                    px = b.color.map(|v| v * shade);
                }
            }
            for v in px {
                let noise = (unit(rng) - 0.5) * 10.0;
                samples.push((v + noise).round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    Image::new(size, size, 3, samples).expect("valid dimensions")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let corpus = data.join("corpus");
    std::fs::create_dir_all(&corpus)?;
    let mut rng = SeedContext::from_seed(SEED);
    for i in 0..10 {
        let img = scene(&mut rng, SIZE);
        write_pnm(corpus.join(format!("scene_{i:02}.ppm")), &img)?;
    }
    write_pnm(data.join("sample.ppm"), &scene(&mut rng, SIZE))?;
    println!("wrote 10 corpus images and sample.ppm to {}", data.display());
    Ok(())
}
