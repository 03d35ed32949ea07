//! Command line front end: `saliency`, `scan`, `freqmap`, `ablate`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{self, ablation_sweep, frequency_map, rows_to_csv, AblationSpec, CorpusImage, FrequencyMap};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::image::pnm::{read_pnm, write_pnm};
use crate::image::Image;
use crate::scan::{self, grid_num_patches, ScanConfig, ScanVariant, SeedPolicy};
use crate::seqio::{read_sequence_file, write_sequence_file};

#[derive(Debug, Parser)]
#[command(name = "dynscan", version, about = "Dynamic patch scanning for vision transformer inputs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the normalized saliency map of an image as a PGM.
    Saliency {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Scan an image and write the patch sequence as a .dsa file.
    Scan(ScanArgs),
    /// Write the patch frequency map (PGM) and its overlay on the image (PPM).
    Freqmap(FreqmapArgs),
    /// Coverage ablation over a directory of PNM images; writes CSV.
    Ablate(AblateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Rp,
    Rt,
    Sp,
    St,
    Systematic,
}

impl From<VariantArg> for ScanVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Rp => ScanVariant::RandomPatches,
            VariantArg::Rt => ScanVariant::RandomTracing,
            VariantArg::Sp => ScanVariant::SalientPatches,
            VariantArg::St => ScanVariant::SalientTracing,
            VariantArg::Systematic => ScanVariant::Systematic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Stochastic,
    FixedPerImage,
}

/// `--num-patches` value: a count or `auto` (systematic grid count).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumPatches {
    Auto,
    Count(usize),
}

impl std::str::FromStr for NumPatches {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(NumPatches::Auto);
        }
        s.parse()
            .map(NumPatches::Count)
            .map_err(|_| format!("expected a positive integer or \"auto\", got {s:?}"))
    }
}

impl NumPatches {
    pub fn resolve(self, height: usize, width: usize, patch_size: usize) -> usize {
        match self {
            NumPatches::Auto => grid_num_patches(height, width, patch_size),
            NumPatches::Count(n) => n,
        }
    }
}

#[derive(Debug, Args)]
pub struct ScanFlags {
    #[arg(long, value_enum)]
    pub variant: VariantArg,
    #[arg(long = "patch-size")]
    pub patch_size: usize,
    #[arg(long = "num-patches", default_value = "auto")]
    pub num_patches: NumPatches,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "seed-policy", value_enum, default_value = "fixed-per-image")]
    pub seed_policy: PolicyArg,
}

impl ScanFlags {
    fn check(&self) -> Result<()> {
        check_patch_size(self.patch_size)?;
        if self.num_patches == NumPatches::Count(0) {
            return Err(Error::config("--num-patches must be at least 1"));
        }
        Ok(())
    }

    fn config(&self, image: &Image, scan_index: u64) -> Result<ScanConfig> {
        let n = self.num_patches.resolve(image.height(), image.width(), self.patch_size);
        let policy = match self.seed_policy {
            PolicyArg::Stochastic => SeedPolicy::Stochastic {
                global_seed: self.seed,
                scan_index,
            },
            PolicyArg::FixedPerImage => SeedPolicy::FixedPerImage {
                global_seed: self.seed,
            },
        };
        let cfg = ScanConfig::new(self.variant.into(), self.patch_size, n).with_seed_policy(policy);
        cfg.validate(image.height(), image.width())?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub flags: ScanFlags,
    /// Number of scans to write. With more than one, files are named
    /// `<stem>-<index>.dsa` and use scan indices 0, 1, ...
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct FreqmapArgs {
    /// A .dsa file, an image, or both (repeat the flag). Without a .dsa the
    /// image is scanned with the scan flags.
    #[arg(long, required = true, num_args = 1..=2)]
    pub input: Vec<PathBuf>,
    /// Frequency map PGM; the overlay is written next to it as `<stem>.overlay.ppm`.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    #[arg(long = "patch-size")]
    pub patch_size: Option<usize>,
    #[arg(long = "num-patches", default_value = "auto")]
    pub num_patches: NumPatches,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "seed-policy", value_enum, default_value = "fixed-per-image")]
    pub seed_policy: PolicyArg,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    /// Directory of .pgm / .ppm / .pnm images.
    #[arg(long)]
    pub input: PathBuf,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "rp,rt,sp,st")]
    pub variant: Vec<VariantArg>,
    #[arg(long = "patch-size", value_delimiter = ',', default_value = "3")]
    pub patch_size: Vec<usize>,
    #[arg(long = "n-list", value_delimiter = ',', required = true)]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 1 runs sequentially, 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

fn check_patch_size(p: usize) -> Result<()> {
    if p == 0 || p.is_multiple_of(2) {
        return Err(Error::config(format!(
            "--patch-size must be a positive odd number, got {p}"
        )));
    }
    Ok(())
}

/// Image id recorded in sequence files: the input file stem.
pub fn image_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn is_sequence_file(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("dsa"))
}

fn with_suffix(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Saliency { input, output } => cmd_saliency(&input, &output),
        Command::Scan(args) => cmd_scan(&args),
        Command::Freqmap(args) => cmd_freqmap(&args),
        Command::Ablate(args) => cmd_ablate(&args),
    }
}

pub fn cmd_saliency(input: &Path, output: &Path) -> Result<()> {
    let image = read_pnm(input)?;
    let map = scan::image_saliency(&image)?;
    write_pnm(output, &map.to_gray().to_image())?;
    println!(
        "saliency {}x{} -> {}",
        image.height(),
        image.width(),
        output.display()
    );
    Ok(())
}

pub fn cmd_scan(args: &ScanArgs) -> Result<()> {
    args.flags.check()?;
    if args.trials == 0 {
        return Err(Error::config("--trials must be at least 1"));
    }
    let image = read_pnm(&args.input)?;
    let id = image_id(&args.input);
    let configs = (0..args.trials as u64)
        .map(|i| args.flags.config(&image, i))
        .collect::<Result<Vec<_>>>()?;
    let map = if args.flags.variant == VariantArg::Sp || args.flags.variant == VariantArg::St {
        Some(scan::image_saliency(&image)?)
    } else {
        None
    };
    for (i, cfg) in configs.iter().enumerate() {
        let seq = scan::scan_with_map(&image, &id, cfg, map.as_ref())?;
        let path = if args.trials == 1 {
            args.output.clone()
        } else {
            with_suffix(&args.output, &format!("-{i}"), "dsa")
        };
        write_sequence_file(&path, &seq)?;
        let seed = seq
            .resolved_seed
            .map_or_else(|| "none".to_string(), |s| s.to_string());
        println!(
            "variant={} patch_size={} num_patches={} seed_policy={} resolved_seed={} output={}",
            cfg.variant,
            cfg.patch_size,
            seq.len(),
            cfg.seed_policy.label(),
            seed,
            path.display()
        );
    }
    Ok(())
}

pub fn cmd_freqmap(args: &FreqmapArgs) -> Result<()> {
    let (seq_paths, image_paths): (Vec<&PathBuf>, Vec<&PathBuf>) =
        args.input.iter().partition(|p| is_sequence_file(p));
    if seq_paths.len() > 1 || image_paths.len() > 1 {
        return Err(Error::config("--input takes at most one .dsa file and one image"));
    }
    if seq_paths.is_empty() {
        let (Some(variant), Some(patch_size)) = (args.variant, args.patch_size) else {
            return Err(Error::config(
                "scanning an image requires --variant and --patch-size",
            ));
        };
        check_patch_size(patch_size)?;
        let flags = ScanFlags {
            variant,
            patch_size,
            num_patches: args.num_patches,
            seed: args.seed,
            seed_policy: args.seed_policy,
        };
        flags.check()?;
        let image = read_pnm(image_paths[0])?;
        let cfg = flags.config(&image, 0)?;
        let seq = scan::scan(&image, &image_id(image_paths[0]), &cfg)?;
        return write_freqmap(&frequency_map(&seq), seq.len(), cfg.patch_size, Some(&image), &args.output);
    }
    let (seq, _) = read_sequence_file(seq_paths[0])?;
    let image = image_paths.first().map(read_pnm).transpose()?;
    if let Some(img) = &image {
        if (img.height(), img.width()) != (seq.image_height, seq.image_width) {
            return Err(Error::DimensionMismatch {
                expected_h: seq.image_height,
                expected_w: seq.image_width,
                found_h: img.height(),
                found_w: img.width(),
            });
        }
    }
    write_freqmap(
        &frequency_map(&seq),
        seq.len(),
        seq.config.patch_size,
        image.as_ref(),
        &args.output,
    )
}

fn write_freqmap(
    map: &FrequencyMap,
    n: usize,
    patch_size: usize,
    image: Option<&Image>,
    output: &Path,
) -> Result<()> {
    write_pnm(output, &map.to_image())?;
    let expected = (n * patch_size * patch_size) as u64;
    let cov = map.coverage();
    println!(
        "mass total={} expected={} conserved={} coverage={:.6} max_count={}",
        map.total(),
        expected,
        map.total() == expected,
        cov.fraction,
        map.max_count()
    );
    if let Some(img) = image {
        let rgb = to_rgb(img);
        let path = with_suffix(output, ".overlay", "ppm");
        write_pnm(&path, &analysis::overlay(map, &rgb)?)?;
        println!("overlay -> {}", path.display());
    } else {
        println!("overlay skipped: no image given");
    }
    Ok(())
}

fn to_rgb(img: &Image) -> Image {
    if img.channels() == 3 {
        return img.clone();
    }
    let samples = img.samples().iter().flat_map(|&v| [v, v, v]).collect();
    Image::new(img.height(), img.width(), 3, samples).expect("same dimensions")
}

/// Reads every `.pgm`, `.ppm` and `.pnm` file of a directory, sorted by name.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusImage>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_pnm = path.extension().is_some_and(|e| {
            ["pgm", "ppm", "pnm"].iter().any(|x| e.eq_ignore_ascii_case(x))
        });
        if is_pnm && path.is_file() {
            paths.push(path);
        }
    }
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            Ok(CorpusImage {
                id: image_id(&p),
                image: read_pnm(&p)?,
            })
        })
        .collect()
}

pub fn cmd_ablate(args: &AblateArgs) -> Result<()> {
    for &p in &args.patch_size {
        check_patch_size(p)?;
    }
    if args.n_list.is_empty() || args.n_list.contains(&0) {
        return Err(Error::config("--n-list needs positive patch counts"));
    }
    if args.trials == 0 {
        return Err(Error::config("--trials must be at least 1"));
    }
    let mut n_list = args.n_list.clone();
    n_list.sort_unstable();
    n_list.dedup();
    let spec = AblationSpec {
        variants: args.variant.iter().map(|&v| v.into()).collect(),
        patch_sizes: args.patch_size.clone(),
        num_patches: n_list,
        trials: args.trials,
        global_seed: args.seed,
    };

    let corpus = load_corpus(&args.input)?;
    if corpus.is_empty() {
        return Err(Error::config(format!(
            "no .pgm/.ppm/.pnm images in {}",
            args.input.display()
        )));
    }
    let rows = with_jobs(args.jobs, |exec| ablation_sweep(&corpus, &spec, exec))??;
    let csv = rows_to_csv(&rows);
    match &args.output {
        Some(path) => {
            std::fs::write(path, &csv).map_err(|e| Error::io(path, e))?;
            println!(
                "ablation images={} rows={} trials={} seed={} -> {}",
                corpus.len(),
                rows.len(),
                args.trials,
                args.seed,
                path.display()
            );
        }
        None => print!("{csv}"),
    }
    Ok(())
}

#[cfg(feature = "parallel")]
fn with_jobs<R: Send>(jobs: usize, f: impl FnOnce(Execution) -> R + Send) -> Result<R> {
    if jobs == 1 {
        return Ok(f(Execution::Sequential));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::config(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(|| f(Execution::Parallel)))
}

#[cfg(not(feature = "parallel"))]
fn with_jobs<R>(_jobs: usize, f: impl FnOnce(Execution) -> R) -> Result<R> {
    Ok(f(Execution::Sequential))
}
