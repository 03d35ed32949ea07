//! Coverage as a function of patch count, per variant and patch size.

use std::fmt::Write as _;

use super::FrequencyMap;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::image::Image;
use crate::saliency::PixelRanking;
use crate::scan::{self, centers, grid_num_patches, mix64, Guide, ScanConfig, ScanVariant, SeedContext, SeedPolicy};

pub const CSV_HEADER: &str = "variant,patch_size,num_patches,trials,mean_coverage,std_coverage";

#[derive(Debug, Clone)]
pub struct CorpusImage {
    pub id: String,
    pub image: Image,
}

#[derive(Debug, Clone)]
pub struct AblationSpec {
    pub variants: Vec<ScanVariant>,
    pub patch_sizes: Vec<usize>,
    pub num_patches: Vec<usize>,
    pub trials: usize,
    pub global_seed: u64,
}

impl Default for AblationSpec {
    fn default() -> Self {
        AblationSpec {
            variants: ScanVariant::DYNAMIC.to_vec(),
            patch_sizes: vec![3],
            num_patches: vec![121],
            trials: 5,
            global_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub variant: ScanVariant,
    pub patch_size: usize,
    pub num_patches: usize,
    pub trials: usize,
    /// Mean over every (image, trial) scan.
    pub mean_coverage: f64,
    /// Population standard deviation over every (image, trial) scan.
    pub std_coverage: f64,
    /// Mean coverage of each corpus image over its trials, in corpus order.
    pub image_means: Vec<f64>,
}

impl AblationRow {
    /// Population standard deviation of the per-image means.
    pub fn cross_image_std(&self) -> f64 {
        mean_std(&self.image_means).1
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    variant: ScanVariant,
    patch_size: usize,
    num_patches: usize,
}

impl Cell {
    /// Scan index of one trial, stable regardless of which other cells run.
    fn scan_index(&self, trial: usize) -> u64 {
        let v = ScanVariant::ALL.iter().position(|&x| x == self.variant).unwrap() as u64;
        mix64(v ^ mix64(self.patch_size as u64 ^ mix64(self.num_patches as u64 ^ mix64(trial as u64))))
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn coverage_of(cfg: &ScanConfig, image: &Image, guide: Guide<'_>) -> Result<f64> {
    let (h, w) = (image.height(), image.width());
    let c = centers(cfg, h, w, guide)?;
    Ok(FrequencyMap::from_centers(c, cfg.patch_size, h, w).coverage().fraction)
}

/// Runs `trials` stochastic scans per image for every (variant, P, N) cell.
///
/// Rows come out in the order variants x patch sizes x patch counts. The
/// systematic variant ignores the patch-count list and yields one row per patch
/// size at its grid count, which requires all corpus images to share their
/// dimensions. Deterministic variants are scanned once per image since every
/// trial would be identical. Output is a pure function of the inputs; the
/// execution mode only changes speed.
pub fn ablation_sweep(
    corpus: &[CorpusImage],
    spec: &AblationSpec,
    exec: Execution,
) -> Result<Vec<AblationRow>> {
    if corpus.is_empty() {
        return Err(Error::config("ablation corpus is empty"));
    }
    if spec.trials == 0 {
        return Err(Error::config("trials must be at least 1"));
    }
    let mut cells = Vec::new();
    for &variant in &spec.variants {
        for &patch_size in &spec.patch_sizes {
            if variant == ScanVariant::Systematic {
                let (h, w) = (corpus[0].image.height(), corpus[0].image.width());
                if let Some(other) = corpus
                    .iter()
                    .find(|c| (c.image.height(), c.image.width()) != (h, w))
                {
                    return Err(Error::config(format!(
                        "systematic rows need equally sized images; {} differs from {}",
                        other.id, corpus[0].id
                    )));
                }
                cells.push(Cell {
                    variant,
                    patch_size,
                    num_patches: grid_num_patches(h, w, patch_size),
                });
            } else {
                cells.extend(spec.num_patches.iter().map(|&num_patches| Cell {
                    variant,
                    patch_size,
                    num_patches,
                }));
            }
        }
    }
    // surface configuration errors before doing any work
    for cell in &cells {
        for entry in corpus {
            ScanConfig::new(cell.variant, cell.patch_size, cell.num_patches)
                .validate(entry.image.height(), entry.image.width())
                .map_err(|e| Error::config(format!("{}: {e}", entry.id)))?;
        }
    }

    let rankings: Vec<Option<PixelRanking>> = if spec.variants.iter().any(|v| v.is_salient()) {
        exec.map(corpus, |entry| {
            scan::image_saliency(&entry.image).map(|m| Some(m.rank_pixels()))
        })
        .into_iter()
        .collect::<Result<_>>()?
    } else {
        vec![None; corpus.len()]
    };

    let mut tasks = Vec::new();
    for (ci, cell) in cells.iter().enumerate() {
        let runs = if cell.variant.is_random() { spec.trials } else { 1 };
        for ii in 0..corpus.len() {
            tasks.extend((0..runs).map(|t| (ci, ii, t)));
        }
    }
    let results: Vec<Result<f64>> = exec.map(&tasks, |&(ci, ii, t)| {
        let cell = cells[ci];
        let entry = &corpus[ii];
        let policy = SeedPolicy::Stochastic {
            global_seed: spec.global_seed,
            scan_index: cell.scan_index(t),
        };
        let cfg = ScanConfig::new(cell.variant, cell.patch_size, cell.num_patches)
            .with_seed_policy(policy);
        match cell.variant {
            v if v.is_random() => {
                let mut rng = SeedContext::derive(&policy, entry.id.as_bytes());
                coverage_of(&cfg, &entry.image, Guide::Random(&mut rng))
            }
            v if v.is_salient() => {
                let rank = rankings[ii].as_ref().expect("rankings computed for salient variants");
                coverage_of(&cfg, &entry.image, Guide::Ranking(rank))
            }
            _ => coverage_of(&cfg, &entry.image, Guide::Grid),
        }
    });
    let results: Vec<f64> = results.into_iter().collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(cells.len());
    let mut cursor = 0;
    for cell in &cells {
        let runs = if cell.variant.is_random() { spec.trials } else { 1 };
        let block = &results[cursor..cursor + runs * corpus.len()];
        cursor += block.len();
        let image_means: Vec<f64> = block.chunks(runs).map(|c| mean_std(c).0).collect();
        // repeated identical trials leave mean and population std unchanged
        let (mean, std) = mean_std(block);
        rows.push(AblationRow {
            variant: cell.variant,
            patch_size: cell.patch_size,
            num_patches: cell.num_patches,
            trials: spec.trials,
            mean_coverage: mean,
            std_coverage: std,
            image_means,
        });
    }
    Ok(rows)
}

/// CSV with a fixed header, 6-decimal reals and LF line endings.
pub fn rows_to_csv(rows: &[AblationRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{:.6},{:.6}",
            r.variant, r.patch_size, r.num_patches, r.trials, r.mean_coverage, r.std_coverage
        )
        .expect("writing to a String cannot fail");
    }
    out
}
