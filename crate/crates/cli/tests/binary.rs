use std::path::Path;
use std::process::Command;

fn commfield(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_commfield"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL_PULLBACK: &str =
    r#"{"scenario": "pullback", "grids": [4, 8, 16], "output": {"vtk": false, "pgm": false}}"#;

#[test]
fn successful_run_writes_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "p.json", SMALL_PULLBACK);
    let out = tmp.path().join("out");
    let res = commfield(&["pullback", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    for f in [
        "metrics.json",
        "original.csv",
        "mapped.csv",
        "mapped_contours.csv",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert!(!out.join("mapped.vtk").exists());
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["scenario"], "pullback");
    assert_eq!(metrics["config"]["grids"], serde_json::json!([4, 8, 16]));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"scenario": "cloak", "grid": [24, 12], "t_end": 0.05, "epsilon_sweep": [], "consistency_points": 50}"#,
    );
    let mut texts = Vec::new();
    for run in ["a", "b"] {
        let out = tmp.path().join(run);
        let res = commfield(&[
            "cloak",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "11",
        ]);
        assert!(
            res.status.success(),
            "{}",
            String::from_utf8_lossy(&res.stderr)
        );
        texts.push((
            std::fs::read(out.join("metrics.json")).unwrap(),
            std::fs::read(out.join("cloaked_steady.csv")).unwrap(),
        ));
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn invalid_config_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "bad.json",
        r#"{"scenario": "cloak", "a": 5, "b": 2}"#,
    );
    let res = commfield(&[
        "cloak",
        "--config",
        &cfg,
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("`a`"));
}

#[test]
fn scenario_must_match_subcommand() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "p.json", SMALL_PULLBACK);
    let res = commfield(&[
        "cloak",
        "--config",
        &cfg,
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn missing_config_file_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.json");
    let res = commfield(&["custom", "--config", missing.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn singular_problem_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "s.json",
        r#"{
            "scenario": "custom",
            "grid": [4, 4],
            "bcs": {
                "left": {"type": "neumann", "flux": 0},
                "right": {"type": "neumann", "flux": 0},
                "bottom": {"type": "neumann", "flux": 0},
                "top": {"type": "neumann", "flux": 0}
            }
        }"#,
    );
    let res = commfield(&[
        "custom",
        "--config",
        &cfg,
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(
        res.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
}

#[test]
fn custom_mapped_transient_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "m.json",
        r#"{
            "scenario": "custom",
            "grid": [8, 8],
            "map": {"map": "scale", "factor": 2.0},
            "transient": {"dt": 0.01, "t_end": 0.1, "snapshot_times": [0.05]},
            "output": {"snapshots": true}
        }"#,
    );
    let out = tmp.path().join("o");
    let res = commfield(&["custom", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    assert!(out.join("u_t0.05.csv").exists());
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    let range = metrics["variants"][0]["extra"]["u_range"].as_f64().unwrap();
    assert!(range > 0.0 && range <= 1.0 + 1e-9);
}
