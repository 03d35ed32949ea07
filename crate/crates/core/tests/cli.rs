use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dynscan::image::pnm::{read_pnm, write_pnm};
use dynscan::seqio::read_sequence_file;
use dynscan::Image;

fn dynscan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynscan"))
        .args(args)
        .output()
        .expect("failed to launch dynscan")
}

fn sample() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/sample.ppm")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn saliency_of_uniform_image_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flat.pgm");
    write_pnm(&input, &Image::filled(20, 24, 1, 77).unwrap()).unwrap();
    let out = dir.path().join("sal.pgm");
    let o = dynscan(&["saliency", "--input", s(&input), "--output", s(&out)]);
    assert!(o.status.success());
    let map = read_pnm(&out).unwrap();
    assert_eq!((map.height(), map.width(), map.channels()), (20, 24, 1));
    assert!(map.samples().iter().all(|&v| v == 0));
}

#[test]
fn saliency_dims_and_peak() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sal.pgm");
    assert!(dynscan(&["saliency", "--input", s(&sample()), "--output", s(&out)]).status.success());
    let map = read_pnm(&out).unwrap();
    assert_eq!((map.height(), map.width()), (32, 32));
    assert_eq!(map.samples().iter().max(), Some(&255));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.pgm");
    let missing = dynscan(&["saliency", "--input", "/nonexistent/img.ppm", "--output", s(&out)]);
    assert_eq!(missing.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nonexistent/img.ppm"));

    let garbage = dir.path().join("garbage.ppm");
    std::fs::write(&garbage, b"P7 nonsense").unwrap();
    let bad = dynscan(&["saliency", "--input", s(&garbage), "--output", s(&out)]);
    assert_eq!(bad.status.code(), Some(4));

    let dsa = dir.path().join("x.dsa");
    let even = dynscan(&[
        "scan", "--input", s(&sample()), "--output", s(&dsa), "--variant", "rp", "--patch-size", "4",
    ]);
    assert_eq!(even.status.code(), Some(2));
    assert!(!dsa.exists());

    // config errors are reported before the input is even opened
    let even_missing = dynscan(&[
        "scan", "--input", "/nonexistent.ppm", "--output", s(&dsa), "--variant", "rp", "--patch-size", "4",
    ]);
    assert_eq!(even_missing.status.code(), Some(2));

    let too_big = dynscan(&[
        "scan", "--input", s(&sample()), "--output", s(&dsa), "--variant", "rp", "--patch-size", "33",
    ]);
    assert_eq!(too_big.status.code(), Some(2));
    assert!(!dsa.exists());

    let sys = dynscan(&[
        "scan", "--input", s(&sample()), "--output", s(&dsa), "--variant", "systematic",
        "--patch-size", "3", "--num-patches", "100",
    ]);
    assert_eq!(sys.status.code(), Some(2));

    let unknown = dynscan(&["scan", "--variant", "zz"]);
    assert_eq!(unknown.status.code(), Some(2));

    std::fs::write(&dsa, b"DSB1\0\0\0\0").unwrap();
    let bad_seq = dynscan(&["freqmap", "--input", s(&dsa), "--output", s(&out)]);
    assert_eq!(bad_seq.status.code(), Some(4));
}

#[test]
fn scan_auto_uses_vit_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rp.dsa");
    let o = dynscan(&[
        "scan", "--input", s(&sample()), "--output", s(&out), "--variant", "rp", "--patch-size", "3",
        "--num-patches", "auto", "--seed", "42",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("num_patches=121"), "{text}");
    assert!(text.contains("resolved_seed="), "{text}");
    let (seq, header) = read_sequence_file(&out).unwrap();
    assert_eq!(seq.len(), 121);
    assert_eq!(header.image_id, "sample");
    assert_eq!(header.resolved_seed.unwrap().to_string(), text.split("resolved_seed=").nth(1).unwrap().split(' ').next().unwrap());
}

#[test]
fn stochastic_trials_write_distinct_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.dsa");
    let o = dynscan(&[
        "scan", "--input", s(&sample()), "--output", s(&out), "--variant", "rt", "--patch-size", "3",
        "--num-patches", "60", "--seed", "1", "--seed-policy", "stochastic", "--trials", "2",
    ]);
    assert!(o.status.success());
    let a = std::fs::read(dir.path().join("scan-0.dsa")).unwrap();
    let b = std::fs::read(dir.path().join("scan-1.dsa")).unwrap();
    assert_ne!(a, b);
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn freqmap_systematic_is_all_ones() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("img.ppm");
    let samples = (0..30 * 30 * 3).map(|i| (i % 251) as u8).collect();
    write_pnm(&img, &Image::new(30, 30, 3, samples).unwrap()).unwrap();
    let out = dir.path().join("freq.pgm");
    let o = dynscan(&[
        "freqmap", "--input", s(&img), "--output", s(&out), "--variant", "systematic", "--patch-size", "5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("conserved=true"));
    let map = read_pnm(&out).unwrap();
    assert!(map.samples().iter().all(|&v| v == 255));
    let overlay = read_pnm(dir.path().join("freq.overlay.ppm")).unwrap();
    assert_eq!((overlay.height(), overlay.width(), overlay.channels()), (30, 30, 3));
}

#[test]
fn freqmap_from_sequence_file() {
    let dir = tempfile::tempdir().unwrap();
    let dsa = dir.path().join("st.dsa");
    assert!(dynscan(&[
        "scan", "--input", s(&sample()), "--output", s(&dsa), "--variant", "st", "--patch-size", "3",
    ])
    .status
    .success());
    let out = dir.path().join("f.pgm");
    let only_seq = dynscan(&["freqmap", "--input", s(&dsa), "--output", s(&out)]);
    assert!(only_seq.status.success());
    let text = stdout(&only_seq);
    assert!(text.contains("total=1089 expected=1089 conserved=true"), "{text}");
    assert!(text.contains("overlay skipped"));

    let both = dynscan(&[
        "freqmap", "--input", s(&dsa), "--input", s(&sample()), "--output", s(&out),
    ]);
    assert!(both.status.success());
    let overlay = read_pnm(dir.path().join("f.overlay.ppm")).unwrap();
    assert_eq!((overlay.height(), overlay.width()), (32, 32));
}

#[test]
fn ablate_rows_and_empty_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/corpus");
    let csv = dir.path().join("a.csv");
    let o = dynscan(&[
        "ablate", "--input", s(&corpus), "--output", s(&csv), "--variant", "rp", "--n-list",
        "121,25,100,50", "--trials", "20", "--seed", "3",
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "variant,patch_size,num_patches,trials,mean_coverage,std_coverage");
    assert_eq!(lines.len(), 5);
    let means: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    let ns: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(ns, ["25", "50", "100", "121"]);
    assert!(means.windows(2).all(|w| w[1] >= w[0] - 0.005));
    assert!(!text.contains('\r'));

    let empty = tempfile::tempdir().unwrap();
    let o = dynscan(&["ablate", "--input", s(empty.path()), "--n-list", "10"]);
    assert_eq!(o.status.code(), Some(2));
}
