use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pathslice(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pathslice")).args(args).output().expect("binary runs")
}

fn configs() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs"))
}

#[test]
fn unknown_manifold_is_a_config_error() {
    let out = pathslice(&["single-step", "--manifold", "sphere3:1", "--t-list", "0.1", "--function", "0,0"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("`manifold`"), "{stderr}");
}

#[test]
fn slice_writes_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs().join("criterion3-sphere.json");
    let mut csvs = Vec::new();
    for sub in ["a", "b"] {
        let out_dir = dir.path().join(sub);
        let out = pathslice(&["slice", "--config", config.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(out_dir.join("criterion3-sphere.json").exists());
        csvs.push(fs::read(out_dir.join("criterion3-sphere.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    let text = String::from_utf8(csvs.remove(0)).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("manifold,t,N,E_policy,E_effective,l2_error,runtime_ms"));
    assert_eq!(lines.count(), 5);
}

#[test]
fn flags_override_config_fields() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs().join("criterion1-circle.json");
    let out = pathslice(&[
        "single-step",
        "--config",
        config.to_str().unwrap(),
        "--t-list",
        "0.1,0.05,0.025",
        "--emit",
        "csv",
        "--name",
        "short",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_ne!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("short.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(!dir.path().join("short.json").exists());
}

#[test]
fn study_mismatch_is_rejected() {
    let config = configs().join("criterion1-circle.json");
    let out = pathslice(&["slice", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stationary_phase_from_flags() {
    let out = pathslice(&["stationary-phase", "--t-list", "0.2,0.1,0.05", "--orders", "1,2"]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("k = 2"), "{stdout}");
}

#[test]
fn verify_all_exit_status_tracks_outcomes() {
    let pass = pathslice(&["verify-all", "--criterion", "4", "--criterion", "8"]);
    assert!(pass.status.success());
    assert_eq!(String::from_utf8_lossy(&pass.stdout).matches("[PASS]").count(), 2);
    let unknown = pathslice(&["verify-all", "--criterion", "9"]);
    assert_eq!(unknown.status.code(), Some(2));
}
