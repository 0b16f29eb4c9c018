//! End-to-end runs of the `mmgks` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mmgks"))
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn reconstruct(config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .args(["reconstruct", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn history_rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("iter,lambda,objective,dp_residual,rre,subspace_dim"));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn deblur_run_writes_frames_history_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = reconstruct(&config_path("deblur.json"), dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for t in 1..=4 {
        assert!(dir.path().join(format!("recon_t{t:03}.pgm")).is_file());
        assert!(dir.path().join(format!("truth_t{t:03}.pgm")).is_file());
    }
    let rows = history_rows(&dir.path().join("history.csv"));
    assert!(!rows.is_empty() && rows.len() <= 150);
    let s = summary(dir.path());
    assert_eq!(s["method"], "AnisoTV");
    assert_eq!(s["quality"]["rre_per_frame"].as_array().unwrap().len(), 4);
    assert_eq!(s["frames"].as_array().unwrap().len(), 4);
    // a DP exit means the last logged residual is within η δ
    let solve = &s["solves"][0];
    if solve["exit_reason"] == "DP" {
        let last: f64 = rows.last().unwrap()[3].parse().unwrap();
        assert!(last <= 1.01 * solve["delta"].as_f64().unwrap());
    }
}

#[test]
fn runs_are_bitwise_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        assert!(reconstruct(&config_path("deblur.json"), dir.path(), &["--method", "gs"]).status.success());
    }
    for file in ["history.csv", "summary.json", "recon_t002.pgm"] {
        assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap(), "{file}");
    }
}

#[test]
fn unknown_method_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = reconstruct(&config_path("deblur.json"), dir.path(), &["--method", "TV7"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    for name in ["AnisoTV", "TVplusTikhonov", "Aniso3DTV", "Iso3DTV", "IsoTV", "GS"] {
        assert!(msg.contains(name), "{msg}");
    }
}

#[test]
fn malformed_config_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, "{ \"experiment\": \"deblur\", ").unwrap();
    let out = reconstruct(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(2));
    let missing = reconstruct(&dir.path().join("absent.json"), &dir.path().join("out"), &[]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn solver_failure_exits_one_with_partial_history() {
    // a zero-intensity scene gives zero data, which cannot seed a Krylov basis
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.json");
    fs::write(
        &cfg,
        r#"{"experiment": "deblur",
            "scene": {"custom": {"n_v": 8, "n_h": 8, "n_t": 2, "objects": []}},
            "forward": {"blur": "medium"},
            "noise": {"sigma": 0.0, "seed": 1}}"#,
    )
    .unwrap();
    let out = reconstruct(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("out/history.csv").is_file());
}

#[test]
fn static_baseline_and_compare() {
    let root = tempfile::tempdir().unwrap();
    let dynamic = root.path().join("dynamic");
    let stat = root.path().join("static");
    let nonneg = root.path().join("nonneg");
    assert!(reconstruct(&config_path("radon_dynamic.json"), &dynamic, &[]).status.success());
    assert!(reconstruct(&config_path("radon_static.json"), &stat, &[]).status.success());
    assert!(reconstruct(&config_path("radon_dynamic.json"), &nonneg, &["--nonneg"]).status.success());

    for t in 1..=8 {
        let rows = history_rows(&stat.join(format!("history_t{t:03}.csv")));
        assert!(!rows.is_empty());
    }
    assert!(!stat.join("history.csv").exists());
    assert_eq!(summary(&stat)["solves"].as_array().unwrap().len(), 8);

    let out = bin().arg("compare").args([&dynamic, &stat, &nonneg]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 4, "{table}");
    let rre: Vec<f64> = lines[1..].iter().map(|l| l.split('\t').nth(2).unwrap().parse().unwrap()).collect();
    assert!(rre.windows(2).all(|w| w[0] <= w[1]), "{table}");
    assert!(table.contains("static-TV [radon-static-baseline]"));
    assert!(table.contains("AnisoTV [radon-dynamic]"));
}

#[test]
fn compare_with_itself_gives_identical_rows() {
    let dir = tempfile::tempdir().unwrap();
    assert!(reconstruct(&config_path("deblur.json"), dir.path(), &[]).status.success());
    let out = bin().arg("compare").args([dir.path(), dir.path()]).output().unwrap();
    assert!(out.status.success());
    let table = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[1], lines[2]);
}

#[test]
fn compare_rejects_missing_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().arg("compare").args([dir.path(), dir.path()]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let one = bin().arg("compare").arg(dir.path()).output().unwrap();
    assert!(!one.status.success());
}
