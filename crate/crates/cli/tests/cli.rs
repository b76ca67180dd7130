use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn gearlmnn(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gearlmnn"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = gearlmnn(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// synth → extract → select on a fresh directory.
fn prepared(per_class: &str, seed: &str) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "synth",
            "--seed",
            seed,
            "--classes",
            "7",
            "--per-class",
            per_class,
            "--out",
            "signals.csv",
        ],
    );
    ok(
        d,
        &["extract", "--input", "signals.csv", "--out", "features.csv"],
    );
    ok(
        d,
        &[
            "select",
            "--input",
            "features.csv",
            "--tree",
            "tree.txt",
            "--subset",
            "subset.txt",
        ],
    );
    dir
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn end_to_end_report() {
    let dir = prepared("60", "7");
    let d = dir.path();
    assert_eq!(read(d, "signals.csv").lines().count(), 421);
    let features = read(d, "features.csv");
    assert!(features.starts_with("mean,standard_error,median,mode,"));
    assert!(features.lines().next().unwrap().ends_with(",count,label"));
    assert!(!read(d, "subset.txt").trim().is_empty());

    let stdout = ok(
        d,
        &[
            "evaluate",
            "--input",
            "features.csv",
            "--subset",
            "subset.txt",
            "--k",
            "1",
            "--test-per-class",
            "50",
            "--out",
            "report.json",
        ],
    );
    assert!(stdout.starts_with("accuracy "));
    let report: Value = serde_json::from_str(&read(d, "report.json")).unwrap();
    let accuracy = report["accuracy"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&accuracy));
    let rows = report["confusion"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 7);
    for row in rows {
        let row = row.as_array().unwrap();
        assert_eq!(row.len(), 7);
        assert_eq!(row.iter().map(|v| v.as_u64().unwrap()).sum::<u64>(), 50);
    }
    assert_eq!(report["config"]["k"], 1);
    assert_eq!(
        report["config"]["confusion_orientation"],
        "rows=actual,columns=predicted"
    );
    assert_eq!(report["seed"], 0);
}

#[test]
fn train_then_classify() {
    let dir = prepared("20", "3");
    let d = dir.path();
    ok(
        d,
        &[
            "train",
            "--input",
            "features.csv",
            "--subset",
            "subset.txt",
            "--out",
            "model.txt",
            "--standardize",
        ],
    );
    assert!(read(d, "model.txt").contains("standardize=true"));
    assert!(d.join("model.train.csv").exists());
    ok(
        d,
        &[
            "classify",
            "--model",
            "model.txt",
            "--input",
            "features.csv",
            "--out",
            "labels.txt",
        ],
    );
    let labels: Vec<String> = read(d, "labels.txt").lines().map(String::from).collect();
    assert_eq!(labels.len(), 140);
    // Every training row classifies as itself.
    let truth: Vec<String> = read(d, "features.csv")
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().to_string())
        .collect();
    assert_eq!(labels, truth);
    let details: Value = serde_json::from_str(&read(d, "labels.json")).unwrap();
    assert_eq!(details["predictions"].as_array().unwrap().len(), 140);
    assert_eq!(details["classes"].as_array().unwrap().len(), 7);

    ok(
        d,
        &[
            "classify",
            "--model",
            "model.txt",
            "--input",
            "features.csv",
            "--out",
            "labels3.txt",
            "--k",
            "3",
        ],
    );
    let details: Value = serde_json::from_str(&read(d, "labels3.json")).unwrap();
    assert_eq!(details["k"], 3);
}

#[test]
fn reruns_are_byte_identical() {
    let a = prepared("15", "5");
    let b = prepared("15", "5");
    for name in ["signals.csv", "features.csv", "tree.txt", "subset.txt"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
    let eval = [
        "evaluate",
        "--input",
        "features.csv",
        "--subset",
        "subset.txt",
        "--test-per-class",
        "5",
        "--seed",
        "9",
        "--out",
        "report.json",
    ];
    ok(a.path(), &eval);
    let mut sequential = vec!["--sequential"];
    sequential.extend(eval);
    ok(b.path(), &sequential);
    assert_eq!(read(a.path(), "report.json"), read(b.path(), "report.json"));

    let sweep = [
        "sweep",
        "--input",
        "features.csv",
        "--subset",
        "subset.txt",
        "--k",
        "1,3",
        "--test-sizes",
        "1,7,14",
        "--trials",
        "2",
        "--out-trials",
        "trials.csv",
        "--out-summary",
        "summary.csv",
    ];
    ok(a.path(), &sweep);
    ok(b.path(), &sweep);
    for name in ["trials.csv", "summary.csv"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
}

#[test]
fn sweep_over_the_full_test_size_range() {
    let dir = prepared("60", "1");
    let d = dir.path();
    ok(
        d,
        &[
            "sweep",
            "--input",
            "features.csv",
            "--subset",
            "subset.txt",
            "--k",
            "1,3,5",
            "--test-sizes",
            "1..59",
            "--trials",
            "2",
            "--out-trials",
            "trials.csv",
            "--out-summary",
            "summary.csv",
        ],
    );
    let trials = read(d, "trials.csv");
    assert_eq!(trials.lines().next().unwrap(), "k,test_size,trial,accuracy");
    assert_eq!(trials.lines().count(), 1 + 3 * 59 * 2);
    let summary = read(d, "summary.csv");
    assert_eq!(summary.lines().count(), 1 + 3 * 59);
    for line in summary.lines().skip(1) {
        let mean: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&mean));
    }
}

#[test]
fn config_file_supplies_defaults() {
    let dir = prepared("15", "2");
    let d = dir.path();
    fs::write(
        d.join("run.conf"),
        "# shared settings\nk=3\nmu=0.2\ntest_per_class=5\nstrict-eq16=true\n",
    )
    .unwrap();
    ok(
        d,
        &[
            "--config",
            "run.conf",
            "evaluate",
            "--input",
            "features.csv",
            "--out",
            "a.json",
        ],
    );
    let a: Value = serde_json::from_str(&read(d, "a.json")).unwrap();
    assert_eq!(a["config"]["k"], 3);
    assert_eq!(a["config"]["mu"], 0.2);
    assert_eq!(a["config"]["pull_weight"], "unit");
    assert_eq!(
        a["confusion"]["rows"][0]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_u64().unwrap())
            .sum::<u64>(),
        5
    );

    ok(
        d,
        &[
            "evaluate",
            "--config",
            "run.conf",
            "--input",
            "features.csv",
            "--out",
            "b.json",
            "--k",
            "1",
            "--strict-eq16=false",
        ],
    );
    let b: Value = serde_json::from_str(&read(d, "b.json")).unwrap();
    assert_eq!(b["config"]["k"], 1);
    assert_eq!(b["config"]["pull_weight"], "complement");
}

#[test]
fn usage_errors_exit_with_2() {
    let dir = prepared("15", "4");
    let d = dir.path();
    let cases: [&[&str]; 6] = [
        &[
            "evaluate",
            "--input",
            "features.csv",
            "--test-per-class",
            "0",
            "--out",
            "r.json",
        ],
        &[
            "evaluate",
            "--input",
            "features.csv",
            "--out",
            "r.json",
            "--no-such-flag",
        ],
        &["frobnicate"],
        &[
            "evaluate",
            "--input",
            "features.csv",
            "--out",
            "r.json",
            "--mu",
            "1.5",
        ],
        &[
            "sweep",
            "--input",
            "features.csv",
            "--test-sizes",
            "0..3",
            "--out-trials",
            "t.csv",
            "--out-summary",
            "s.csv",
        ],
        &[
            "evaluate",
            "--input",
            "features.csv",
            "--out",
            "r.json",
            "--metric",
            "cosine",
        ],
    ];
    for args in cases {
        let out = gearlmnn(d, args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(!out.stderr.is_empty());
    }
    fs::write(d.join("bad.conf"), "colour=blue\n").unwrap();
    let out = gearlmnn(d, &["--config", "bad.conf", "synth", "--out", "s.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!d.join("r.json").exists());
}

#[test]
fn io_errors_exit_with_1_and_name_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let missing: PathBuf = d.join("nowhere.csv");
    let out = gearlmnn(
        d,
        &[
            "evaluate",
            "--input",
            missing.to_str().unwrap(),
            "--out",
            "r.json",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.csv"));

    let out = gearlmnn(d, &["synth", "--out", "no/such/dir/s.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no/such/dir/s.csv"));

    let out = gearlmnn(d, &["--config", "absent.conf", "synth", "--out", "s.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.conf"));
}

#[test]
fn help_documents_every_flag() {
    let dir = tempfile::tempdir().unwrap();
    let help = ok(dir.path(), &["evaluate", "--help"]);
    for flag in [
        "--k",
        "--mu",
        "--step",
        "--iterations",
        "--seed",
        "--test-per-class",
        "--standardize",
        "--strict-eq16",
        "--knn-restricted-impostors",
        "--total-split",
        "--metric",
        "--subset",
        "--config",
        "--sequential",
    ] {
        assert!(help.contains(flag), "evaluate --help lacks {flag}");
    }
    let top = ok(dir.path(), &["--help"]);
    for cmd in [
        "synth", "extract", "select", "train", "classify", "evaluate", "sweep",
    ] {
        assert!(top.contains(cmd));
    }
}

#[test]
fn extracts_a_plain_text_window() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("window.txt"), "1\n2\n3\n4\n5\n").unwrap();
    ok(d, &["extract", "--input", "window.txt", "--out", "f.csv"]);
    let text = read(d, "f.csv");
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(!lines[0].contains("label"));
    assert!(lines[1].starts_with("3,0,3,"));
}
