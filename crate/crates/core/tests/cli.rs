use std::path::Path;
use std::process::{Command, Output};

use chemonet::runner::output::{DIAGNOSTICS_HEADER, SNAPSHOT_HEADER};
use chemonet::runner::PRESETS;

fn chemonet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chemonet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn first_line(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

#[test]
fn lists_every_preset() {
    let out = chemonet(&["preset", "list"]);
    assert!(out.status.success());
    let names: Vec<String> = stdout(&out).lines().map(str::to_string).collect();
    assert_eq!(names, PRESETS);
}

#[test]
fn validates_presets_and_shown_configs() {
    let dir = tempfile::tempdir().unwrap();
    let shown = chemonet(&["preset", "show", "twelve_arc"]);
    assert!(shown.status.success());
    let path = dir.path().join("twelve.json");
    std::fs::write(&path, &shown.stdout).unwrap();
    let out = chemonet(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("ok"));
}

#[test]
fn invalid_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let text = stdout(&chemonet(&["preset", "show", "two_arc_full_dissipative"]))
        .replacen("0.8", "0.9", 1);
    std::fs::write(&path, text).unwrap();
    assert_eq!(chemonet(&["validate", "--config", path.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(chemonet(&["validate"]).status.code(), Some(1));
    assert_eq!(chemonet(&["run", "--preset", "no_such_preset"]).status.code(), Some(1));
}

#[test]
fn blowup_exits_with_two_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = chemonet(&["run", "--preset", "blowup_single_arc", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("blow-up at t ="));
    assert_eq!(first_line(&dir.path().join("blowup_single_arc_snapshots.csv")), SNAPSHOT_HEADER);
    assert_eq!(first_line(&dir.path().join("blowup_single_arc_diagnostics.csv")), DIAGNOSTICS_HEADER);
}

#[test]
fn repeated_runs_write_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = chemonet(&[
            "run",
            "--preset",
            "two_arc_full_nondissipative",
            "--t-final",
            "0.05",
            "--snapshot-every",
            "0.01",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    for file in ["two_arc_full_nondissipative_snapshots.csv", "two_arc_full_nondissipative_diagnostics.csv"] {
        let x = std::fs::read(a.path().join(file)).unwrap();
        let y = std::fs::read(b.path().join(file)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{file}");
    }
}

#[test]
fn steady_prints_the_analytic_state() {
    let out = chemonet(&["steady", "--preset", "two_arc_simplified"]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let amp = value["amplitude"].as_array().unwrap();
    assert!((amp[0].as_f64().unwrap() - 34.12).abs() < 0.05);
    assert!((amp[1].as_f64().unwrap() - 56.25).abs() < 0.05);
}

#[test]
fn sweep_writes_a_regime_map() {
    let dir = tempfile::tempdir().unwrap();
    let out = chemonet(&[
        "sweep",
        "--lambda1",
        "1,5",
        "--lambda2",
        "2,4",
        "--t-final",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("regime_map.csv")).unwrap();
    assert_eq!(text.lines().count(), 5);
}
