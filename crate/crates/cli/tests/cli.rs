use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn slrm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slrm")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("slrm-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

const CONFIG: &str = r#"
seed = 11

[phantom]
kind = "rectangles"
count = 3

[grid]
n1 = 32
n2 = 32

[mask]
fraction = 0.35

[noise]
sigma = 0.5

[method]
names = ["tgv", "infconv", "framelet", "proposed"]
support = 3

[proposed]
max_iter = 20

[tgv]
max_iter = 40

[infconv]
max_iter = 40

[framelet]
max_iter = 40
"#;

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn demo1d_reports_annihilation() {
    let out = slrm(&["demo1d", "--n", "64"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    for (row, bound) in rows.iter().zip([3usize, 2]) {
        let r1: f64 = row[2].parse().unwrap();
        let r2: f64 = row[3].parse().unwrap();
        assert!(r1 < 1e-10 && r2 < 1e-10, "{row:?}");
        assert!(row[4].parse::<usize>().unwrap() <= bound);
        assert!(row[5].parse::<usize>().unwrap() <= bound);
    }
}

#[test]
fn spectrum_ranks_respect_the_bound() {
    let out = slrm(&["spectrum", "--n", "32", "--supports", "5,7"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        let v: Vec<usize> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!(v[1] <= v[3] && v[2] <= v[3], "{line}");
    }
}

#[test]
fn exit_codes_follow_error_kinds() {
    let dir = scratch("codes");
    let bad = write_config(&dir, &CONFIG.replace("support = 3", "support = 4"));
    let out = slrm(&["mask", "-c", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let missing = dir.join("nope.toml");
    assert_eq!(slrm(&["mask", "-c", missing.to_str().unwrap()]).status.code(), Some(4));

    let junk = dir.join("junk.bin");
    std::fs::write(&junk, b"not an array").unwrap();
    let j = junk.to_str().unwrap();
    assert_eq!(slrm(&["evaluate", "--image", j, "--reference", j]).status.code(), Some(4));
    std::fs::remove_dir_all(&dir).unwrap();
}

fn outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e != "toml") || p.file_name().unwrap().to_string_lossy().contains("manifest"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn restore_is_byte_identical_across_runs_and_jobs() {
    let dir = scratch("restore");
    let cfg = write_config(&dir, CONFIG);
    let (a, b) = (dir.join("a"), dir.join("b"));
    let c = cfg.to_str().unwrap();
    let run1 = slrm(&["restore", "-c", c, "-o", a.to_str().unwrap()]);
    assert!(run1.status.success(), "{}", String::from_utf8_lossy(&run1.stderr));
    let run2 = slrm(&["restore", "-c", c, "-o", b.to_str().unwrap(), "--jobs", "3"]);
    assert!(run2.status.success());
    assert_eq!(run1.stdout, run2.stdout);
    let (oa, ob) = (outputs(&a), outputs(&b));
    assert_eq!(oa.len(), 1 + 4 * 4 + 1);
    assert_eq!(oa, ob);

    let report = String::from_utf8(std::fs::read(a.join("report.csv")).unwrap()).unwrap();
    assert!(report.starts_with("image,method,snr,hfen,ssim,runtime_s\n"));
    assert!(report.lines().skip(1).all(|l| l.ends_with(",NA")));

    let eval = slrm(&[
        "evaluate",
        "--image",
        a.join("tgv_image.bin").to_str().unwrap(),
        "--reference",
        a.join("tgv_image.bin").to_str().unwrap(),
    ]);
    assert!(eval.status.success());
    assert!(String::from_utf8(eval.stdout).unwrap().contains("inf"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn phantom_mask_and_degrade_are_reproducible() {
    let dir = scratch("stages");
    let cfg = write_config(&dir, CONFIG);
    let c = cfg.to_str().unwrap();
    for sub in ["a", "b"] {
        let o = dir.join(sub);
        let o = o.to_str().unwrap();
        for cmd in ["phantom", "mask", "degrade"] {
            assert!(slrm(&[cmd, "-c", c, "-o", o]).status.success(), "{cmd}");
        }
    }
    let staged = dir.join("c");
    let a = dir.join("a");
    let out = slrm(&[
        "degrade",
        "-c",
        c,
        "-o",
        staged.to_str().unwrap(),
        "--spectrum",
        a.join("spectrum.bin").to_str().unwrap(),
        "--mask",
        a.join("mask.bin").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(outputs(&dir.join("a")), outputs(&dir.join("b")));
    assert_eq!(std::fs::read(a.join("observed.bin")).unwrap(), std::fs::read(staged.join("observed.bin")).unwrap());
    std::fs::remove_dir_all(&dir).unwrap();
}
