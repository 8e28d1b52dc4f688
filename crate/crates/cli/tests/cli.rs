//! Black-box tests of the command-line interface.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stresslab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).to_string()
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("stresslab-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

/// Byte-compare every file of two directories.
fn assert_dirs_identical(a: &Path, b: &Path) {
    let list = |d: &Path| -> Vec<String> {
        let mut names: Vec<String> = std::fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().to_string())
            .collect();
        names.sort();
        names
    };
    let names = list(a);
    assert_eq!(names, list(b), "directory listings differ");
    for name in names {
        let fa = std::fs::read(a.join(&name)).unwrap();
        let fb = std::fs::read(b.join(&name)).unwrap();
        assert_eq!(fa, fb, "file {name} differs");
    }
}

#[test]
fn synth_is_byte_deterministic() {
    let d1 = tmp_dir("synth1");
    let d2 = tmp_dir("synth2");
    for d in [&d1, &d2] {
        let out = run(&[
            "synth",
            "--out",
            d.to_str().unwrap(),
            "--subjects",
            "4",
            "--seed",
            "11",
            "--duration",
            "3",
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    assert_dirs_identical(&d1, &d2);
}

#[test]
fn synth_rejects_tiny_cohorts() {
    let out = run(&["synth", "--out", "/tmp/never", "--subjects", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("at least 4"));
}

#[test]
fn manifest_labels_match_recomputation() {
    let dir = tmp_dir("manifest");
    let out = run(&[
        "synth",
        "--out",
        dir.to_str().unwrap(),
        "--subjects",
        "6",
        "--seed",
        "3",
        "--duration",
        "3",
    ]);
    assert!(out.status.success());
    // ingest-check recomputes labels from the manifest scores and fails on
    // any mismatch
    let check = run(&["ingest-check", "--input", dir.to_str().unwrap()]);
    assert!(check.status.success(), "{}", stderr(&check));
    assert!(stdout(&check).contains("6 subjects parsed cleanly"));
}

#[test]
fn metrics_replays_published_tables() {
    let dir = tmp_dir("metrics");
    std::fs::create_dir_all(&dir).unwrap();
    let two = dir.join("two.csv");
    std::fs::write(&two, "21,1\n1,17\n").unwrap();
    let out = run(&["metrics", "--file", two.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("accuracy  95.00%"), "{text}");

    let three = dir.join("three.csv");
    std::fs::write(&three, "10,1,1\n2,15,2\n1,2,6\n").unwrap();
    let out = run(&["metrics", "--file", three.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("accuracy  77.50%"), "{text}");
}

#[test]
fn metrics_rejects_non_square_input() {
    let dir = tmp_dir("ragged");
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("bad.csv");
    std::fs::write(&f, "1,2,3\n4,5\n").unwrap();
    let out = run(&["metrics", "--file", f.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("square"));
}

#[test]
fn missing_input_reports_the_path() {
    let out = run(&["ingest-check", "--input", "/tmp/does-not-exist-xyz"]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
    assert!(stderr(&out).contains("does-not-exist-xyz"));
}

#[test]
fn unknown_config_key_exits_with_config_code() {
    let dir = tmp_dir("cfg");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.conf");
    std::fs::write(&cfg, "definitely_not_a_key = 1\n").unwrap();
    let out = run(&[
        "features",
        "--config",
        cfg.to_str().unwrap(),
        "--input",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("definitely_not_a_key"));
}

#[test]
fn features_csv_has_58_named_columns() {
    let dir = tmp_dir("features");
    let out_dir = tmp_dir("features-out");
    let out = run(&[
        "synth",
        "--out",
        dir.to_str().unwrap(),
        "--subjects",
        "4",
        "--seed",
        "5",
        "--duration",
        "4",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = run(&[
        "features",
        "--input",
        dir.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--scheme",
        "two",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(out_dir.join("features_two.csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    // subject_id + 58 features + label
    assert_eq!(header.len(), 60, "{header:?}");
    assert_eq!(header[0], "subject_id");
    assert_eq!(header[1], "dasm_delta_tp9_tp10");
    assert_eq!(header[59], "label");
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn shimmer_microsiemens_unit_round_trips() {
    let dir = tmp_dir("us");
    let out = run(&[
        "synth",
        "--out",
        dir.to_str().unwrap(),
        "--subjects",
        "4",
        "--seed",
        "2",
        "--duration",
        "3",
        "--gsr-unit",
        "us",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let shimmer = std::fs::read_to_string(dir.join("s000_shimmer.csv")).unwrap();
    assert!(shimmer.lines().next().unwrap().contains("gsr_uS"));
    let check = run(&["ingest-check", "--input", dir.to_str().unwrap()]);
    assert!(check.status.success(), "{}", stderr(&check));
    assert!(stdout(&check).contains("µS"));
}
