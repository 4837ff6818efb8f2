use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ajpeg::io::encode_ppm;
use ajpeg_core::RasterImage;

const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures/golden.ajpg");

fn ajpeg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ajpeg"))
        .args(args)
        .env("AJPEG_THREADS", "2")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_constant(path: &Path) {
    let img = RasterImage::from_fn(64, 64, |_, _| [0.4, 0.5, 0.6]).unwrap();
    fs::write(path, encode_ppm(&img)).unwrap();
}

#[test]
fn encode_constant_image() {
    let dir = tempfile::tempdir().unwrap();
    let (input, output) = (dir.path().join("c.ppm"), dir.path().join("c.ajpg"));
    write_constant(&input);
    let out = ajpeg(&["encode", p(&input), "-o", p(&output), "-t", "0.01"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).matches(" 1 elements").count(), 3, "{}", stdout(&out));
    assert!(fs::metadata(&output).unwrap().len() < 100);

    let decoded = dir.path().join("d.ppm");
    let out = ajpeg(&["decode", p(&output), "-o", p(&decoded)]);
    assert!(out.status.success());
    let out = ajpeg(&["compare", p(&input), p(&decoded)]);
    assert!(out.status.success());
}

#[test]
fn decode_golden_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let output = dir.path().join("g.png");
    let out = ajpeg(&["decode", GOLDEN, "-o", p(&output)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).starts_with("24x40"));
    assert_eq!(&fs::read(&output).unwrap()[1..4], b"PNG");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.ajpg");
    let mut bytes = fs::read(GOLDEN).unwrap();
    bytes[0] = b'X';
    fs::write(&bad, bytes).unwrap();
    let out = dir.path().join("x.ppm");
    assert_eq!(ajpeg(&["decode", p(&bad), "-o", p(&out)]).status.code(), Some(4));

    let input = dir.path().join("c.ppm");
    write_constant(&input);
    assert_eq!(
        ajpeg(&["encode", p(&input), "-o", p(&out), "-t", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        ajpeg(&["encode", p(&input), "-o", p(&out), "-t", "-1"]).status.code(),
        Some(2)
    );
    assert_eq!(ajpeg(&["frobnicate"]).status.code(), Some(2));

    let missing = dir.path().join("missing.ppm");
    assert_eq!(
        ajpeg(&["encode", p(&missing), "-o", p(&out), "-t", "0.01"])
            .status
            .code(),
        Some(3)
    );
    fs::write(&missing, b"not an image").unwrap();
    assert_eq!(ajpeg(&["compare", p(&missing), p(&input)]).status.code(), Some(3));
}

#[test]
fn compare_identical() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("c.ppm");
    write_constant(&input);
    let out = ajpeg(&["compare", p(&input), p(&input)]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("inf"), "{}", stdout(&out));
}

#[test]
fn bench_empty_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let out = ajpeg(&["bench", "--corpus", p(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).lines().count(), 1);
    assert_eq!(stdout(&out).trim_end(), ajpeg::bench::CSV_HEADER.trim_end());
}

#[test]
fn analyze_subcommands() {
    let out = ajpeg(&["analyze", "bound", "--eps", "0.008"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row = text.lines().nth(1).unwrap();
    let gap: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
    assert!(gap > 2.7e-9 && gap < 5.4e-9, "{row}");

    let out = ajpeg(&["analyze", "norms", "--size", "32"]);
    assert!(out.status.success());
    let norm: f64 = stdout(&out)
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    assert!(norm > 0.0 && norm <= 0.131);

    let out = ajpeg(&["analyze", "mc", "--trials", "500"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("counterexample,0.0075,500,"), "{}", stdout(&out));

    let dir = tempfile::tempdir().unwrap();
    let (input, noised) = (dir.path().join("c.ppm"), dir.path().join("n.ppm"));
    write_constant(&input);
    let out = ajpeg(&["analyze", "noise", p(&input), "-o", p(&noised), "--eps", "0"]);
    assert!(out.status.success());
    assert_eq!(fs::read(&input).unwrap(), fs::read(&noised).unwrap());
}

#[test]
fn gen_corpus_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = ajpeg(&["gen-corpus", p(d.path()), "--size", "32", "--seed", "5"]);
        assert!(out.status.success());
        assert_eq!(stdout(&out).lines().count(), 7);
    }
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 7);
    for n in names {
        assert_eq!(
            fs::read(a.path().join(&n)).unwrap(),
            fs::read(b.path().join(&n)).unwrap()
        );
    }
}
