use serde_json::json;
use std::path::Path;
use std::process::Command;

fn uniloc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uniloc"))
}

fn write(dir: &Path, name: &str, v: serde_json::Value) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

fn spectrum(t: f64) -> serde_json::Value {
    json!({
        "model": {"family": "band-1d", "t": t, "n": 16, "phases": {"kind": "uniform", "beta": 0.3}},
        "seed": 7,
        "experiment": {"kind": "spectrum"}
    })
}

#[test]
fn validate_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let ok = write(d.path(), "ok.json", spectrum(0.5));
    let bad = write(d.path(), "bad.json", spectrum(1.2));
    assert_eq!(uniloc().args(["validate"]).arg(&ok).status().unwrap().code(), Some(0));
    let out = uniloc().args(["validate"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("model.t"));
    let missing = d.path().join("missing.json");
    assert_eq!(uniloc().args(["validate"]).arg(&missing).status().unwrap().code(), Some(1));
}

#[test]
fn run_writes_to_env_dir() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.json", spectrum(0.5));
    let out_dir = d.path().join("from-env");
    let out = uniloc().args(["run"]).arg(&cfg).env("UNILOC_OUT_DIR", &out_dir).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("manifest.json").exists());
    assert!(out_dir.join("eigenvalues.csv").exists());
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(summary.is_object());

    let flag = d.path().join("from-flag");
    let st = uniloc()
        .args(["run"])
        .arg(&cfg)
        .arg("--out")
        .arg(&flag)
        .args(["--threads", "2"])
        .env("UNILOC_OUT_DIR", &out_dir)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let cmp = uniloc().args(["compare"]).arg(&out_dir).arg(&flag).output().unwrap();
    assert_eq!(cmp.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&cmp.stdout).unwrap();
    assert_eq!(report["byte_identical"], true);
}

#[test]
fn runtime_failure_exits_two() {
    let d = tempfile::tempdir().unwrap();
    // Free shifts reach the boundary of a small ring.
    let cfg = write(
        d.path(),
        "c.json",
        json!({
            "model": {"family": "band-1d", "t": 1.0, "n": 16, "phases": {"kind": "uniform-full"}},
            "seed": 1,
            "experiment": {"kind": "evolve-moments", "n_max": 50}
        }),
    );
    let out = uniloc().args(["run"]).arg(&cfg).arg("--out").arg(d.path().join("o")).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let cmp = uniloc().args(["compare"]).arg(d.path()).arg(d.path().join("nope")).status().unwrap();
    assert_eq!(cmp.code(), Some(2));
}
