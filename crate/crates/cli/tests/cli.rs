//! End-to-end runs of the `polarlab` binary.

use std::fs;
use std::process::{Command, Output};

fn polarlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polarlab"))
        .args(args)
        .env_remove("POLARLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn fig3_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = polarlab(&[
        "fig3_bimodality_runs",
        "--graph",
        "sbm:k=3,n=150,p=0.3,q=0.02",
        "--inits",
        "3",
        "--steps",
        "40",
        "--seed",
        "5",
        "--out",
        out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("fig3.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("run,t,bimodality"));
    // Three runs of 41 recorded steps.
    assert_eq!(csv.lines().count(), 1 + 3 * 41);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["steps"], "40");
    assert_eq!(manifest["config"]["seed"], 5);
    assert_eq!(manifest["scenario"], "fig3_bimodality_runs");
}

#[test]
fn config_replay_reproduces_outputs() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let o = polarlab(&[
        "custom",
        "--graph",
        "geometric:n=120,r=0.25",
        "--metric",
        "bimodality",
        "--metric",
        "variance",
        "--inits",
        "2",
        "--steps",
        "15",
        "--out",
        first.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = first.path().join("manifest.json");
    let o = polarlab(&[
        "--config",
        manifest.to_str().unwrap(),
        "--out",
        second.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read(first.path().join("custom.csv")).unwrap(),
        fs::read(second.path().join("custom.csv")).unwrap()
    );
    let csv = fs::read_to_string(first.path().join("custom.csv")).unwrap();
    assert!(csv.lines().any(|l| l.contains(",variance,")));
    assert!(!csv.lines().any(|l| l.contains(",local_agreement,")));
}

#[test]
fn fig1_reports_checks() {
    let dir = tempfile::tempdir().unwrap();
    let o = polarlab(&[
        "fig1_metrics_vs_time",
        "--graph",
        "sbm:k=2,n=200,p=0.3,q=0.01",
        "--graph",
        "regular:n=100,d=4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("PASS sbm:k=2,n=200,p=0.3,q=0.01: local agreement rises"));
    assert!(stdout.contains("PASS regular:n=100,d=4: std non-increasing"));
}

#[test]
fn failed_runtime_check_exits_nonzero() {
    // With no steps the final agreement equals the initial one.
    let dir = tempfile::tempdir().unwrap();
    let o = polarlab(&[
        "fig1_metrics_vs_time",
        "--graph",
        "sbm:k=2,n=60,p=0.5,q=0.05",
        "--steps",
        "0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("local agreement rises"));
    assert!(dir.path().join("fig1.csv").exists());
}

#[test]
fn invalid_arguments_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    let o = polarlab(&["fig7", "--out", out]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("unknown scenario"));

    let o = polarlab(&["fig2_profiles", "--issues", "0", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("issues"));

    let o = polarlab(&["custom", "--graph", "sbm:k=2,n=10,p=0.1,q=0.5", "--out", out]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("q <= p"));

    let o = polarlab(&["fig3_bimodality_runs", "--steps", "soon", "--out", out]);
    assert!(!o.status.success());

    let o = polarlab(&["--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("manifest.json").exists());
}

#[test]
fn thread_cap_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_polarlab"))
        .args(["fig6_agreement_vs_lambda2", "--graph", "sbm:k=2,n=60,p=0.5,q=0.05", "--graph", "geometric:n=80,r=0.3"])
        .args(["--out", dir.path().to_str().unwrap()])
        .env("POLARLAB_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("POLARLAB_THREADS"));
}
