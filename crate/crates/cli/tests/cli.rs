use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "\
replicas = 200
verify_paths = 100
symmetry_paths = 200
lemma_paths = 200
n_schedule = [256, 1024]
scan_seeds = 2
dt = 0.001
";

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rwrs-lab"))
        .args(args)
        .output()
        .unwrap()
}

fn config(dir: &Path, extra: &str) -> String {
    let path = dir.join("config.toml");
    std::fs::write(&path, format!("{SMALL}{extra}")).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn theta_sample_passes_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "");
    let out_dir = dir.path().join("out");
    let o = lab(&["theta-sample", "--config", &cfg, "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("verdict: Pass"));
    assert!(out_dir.join("summary.json").exists());
    assert!(out_dir.join("theta_triples_tent_ramp.csv").exists());
}

#[test]
fn replay_reproduces_samples_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "");
    let first = dir.path().join("first");
    let again = dir.path().join("again");
    let o = lab(&[
        "annealed-limit",
        "--config",
        &cfg,
        "--seed",
        "5",
        "--out-dir",
        first.to_str().unwrap(),
    ]);
    assert!(matches!(o.status.code(), Some(0 | 1)), "{}", stdout(&o));
    let summary = first.join("summary.json");
    let r = lab(&[
        "replay",
        summary.to_str().unwrap(),
        "--out-dir",
        again.to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), o.status.code());
    let mut compared = 0;
    for entry in std::fs::read_dir(&first).unwrap() {
        let name = entry.unwrap().file_name();
        if name.to_str().unwrap().ends_with(".csv") {
            let a = std::fs::read(first.join(&name)).unwrap();
            let b = std::fs::read(again.join(&name)).unwrap();
            assert!(a == b, "{name:?} differs");
            compared += 1;
        }
    }
    assert!(compared > 0);
}

#[test]
fn no_match_exits_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "epsilon = 1e-9\n");
    let o = lab(&[
        "quenched-scan",
        "--config",
        &cfg,
        "--out-dir",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("verdict: Inconclusive"));
}

#[test]
fn invalid_config_exits_with_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "unknown_knob = 3\n");
    let o = lab(&["lemma-bounds", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    let o = lab(&[
        "theta-sample",
        "--config",
        dir.path().join("missing.toml").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn default_config_round_trips_through_a_run() {
    let o = lab(&["default-config"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("epsilon = 0.4"));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("default.toml");
    std::fs::write(&path, text).unwrap();
    let o = lab(&[
        "theta-sample",
        "--config",
        path.to_str().unwrap(),
        "--replicas",
        "100",
        "--out-dir",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}
