use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use uniloc_ffi::*;

const MODEL: &str = r#"{"family":"band-1d","t":0.5,"n":16,"phases":{"kind":"uniform-full"}}"#;

fn build(json: &str) -> (UnilocStatus, *mut UnilocMatrix) {
    let s = CString::new(json).unwrap();
    let mut m = ptr::null_mut();
    let st = unsafe { uniloc_model_build(s.as_ptr(), 7, 0, &mut m) };
    (st, m)
}

fn last_error() -> String {
    let p = uniloc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn build_query_and_free() {
    let (st, m) = build(MODEL);
    assert_eq!(st, UnilocStatus::Ok);
    assert!(uniloc_last_error().is_null());
    unsafe {
        assert_eq!(uniloc_matrix_dim(m), 16);
        let mut res = f64::NAN;
        assert_eq!(uniloc_matrix_unitarity_residual(m, &mut res), UnilocStatus::Ok);
        assert!(res < 1e-13);

        let mut x = vec![UnilocComplex { re: 0.0, im: 0.0 }; 16];
        x[3].re = 1.0;
        let mut y = x.clone();
        assert_eq!(uniloc_matrix_matvec(m, x.as_ptr(), y.as_mut_ptr(), 16), UnilocStatus::Ok);
        let norm: f64 = y.iter().map(|z| z.re * z.re + z.im * z.im).sum();
        assert!((norm - 1.0).abs() < 1e-13);

        let same = uniloc::models::ModelSpec::sample(&serde_json::from_str(MODEL).unwrap(), 7, 0).unwrap();
        let mut g = vec![UnilocComplex { re: 0.0, im: 0.0 }; 16];
        let z = UnilocComplex { re: 0.3, im: 0.4 };
        assert_eq!(uniloc_matrix_resolvent_column(m, z, 5, g.as_mut_ptr(), 16), UnilocStatus::Ok);
        let want = uniloc::solve::resolvent_column(&same, uniloc::C64::new(0.3, 0.4), 5).unwrap();
        for (a, b) in g.iter().zip(&want) {
            assert_eq!((a.re, a.im), (b.re, b.im));
        }

        let mut s = ptr::null_mut();
        assert_eq!(uniloc_matrix_to_json(m, &mut s), UnilocStatus::Ok);
        let back: uniloc::ComplexBandMatrix = serde_json::from_str(CStr::from_ptr(s).to_str().unwrap()).unwrap();
        assert_eq!(back, same);
        uniloc_string_free(s);
        uniloc_matrix_free(m);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let (st, m) = build(r#"{"family":"band-1d","t":1.5,"n":16,"phases":{"kind":"uniform-full"}}"#);
    assert_eq!(st, UnilocStatus::Validation);
    assert!(m.is_null());
    assert!(last_error().contains("model.t"));

    assert_eq!(build("{").0, UnilocStatus::Validation);
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(uniloc_model_build(ptr::null(), 0, 0, &mut out), UnilocStatus::NullPointer);
        assert_eq!(uniloc_matrix_dim(ptr::null()), 0);
        uniloc_matrix_free(ptr::null_mut());
        uniloc_string_free(ptr::null_mut());

        let (_, m) = build(MODEL);
        let mut g = vec![UnilocComplex { re: 0.0, im: 0.0 }; 16];
        let on = UnilocComplex { re: 0.6, im: 0.8 };
        assert_eq!(uniloc_matrix_resolvent_column(m, on, 0, g.as_mut_ptr(), 16), UnilocStatus::OnUnitCircle);
        let z = UnilocComplex { re: 0.1, im: 0.0 };
        assert_eq!(uniloc_matrix_resolvent_column(m, z, 0, g.as_mut_ptr(), 8), UnilocStatus::DimensionMismatch);
        assert_eq!(uniloc_matrix_resolvent_column(m, z, 99, g.as_mut_ptr(), 16), UnilocStatus::InvalidParameter);
        uniloc_matrix_free(m);
    }
}

#[test]
fn validate_and_run() {
    let good = CString::new(format!(r#"{{"model":{MODEL},"seed":3,"experiment":{{"kind":"spectrum"}}}}"#)).unwrap();
    let bad = CString::new(format!(r#"{{"model":{MODEL},"seed":3,"experiment":{{"kind":"nope"}}}}"#)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = CString::new(dir.path().to_str().unwrap()).unwrap();
    unsafe {
        assert_eq!(uniloc_config_validate(good.as_ptr()), UnilocStatus::Ok);
        assert_eq!(uniloc_config_validate(bad.as_ptr()), UnilocStatus::Validation);
        let mut summary = ptr::null_mut();
        assert_eq!(uniloc_run(good.as_ptr(), out.as_ptr(), 2, &mut summary), UnilocStatus::Ok);
        let s: serde_json::Value = serde_json::from_str(CStr::from_ptr(summary).to_str().unwrap()).unwrap();
        assert_eq!(s["experiment"], "spectrum");
        uniloc_string_free(summary);
    }
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(uniloc_version()) };
    assert_eq!(v.to_str().unwrap(), uniloc::experiment::VERSION);
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/uniloc.h")
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(header()).unwrap();
    for name in [
        "uniloc_version",
        "uniloc_last_error",
        "uniloc_model_build",
        "uniloc_matrix_free",
        "uniloc_matrix_dim",
        "uniloc_matrix_unitarity_residual",
        "uniloc_matrix_matvec",
        "uniloc_matrix_resolvent_column",
        "uniloc_matrix_to_json",
        "uniloc_string_free",
        "uniloc_config_validate",
        "uniloc_run",
        "typedef struct UnilocMatrix UnilocMatrix;",
        "UNILOC_STATUS_ON_UNIT_CIRCLE = 6",
    ] {
        assert!(h.contains(name), "{name} missing from header");
    }
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "uniloc.h"

int main(void) {
    UnilocMatrix *m = NULL;
    const char *model = "{\"family\":\"quantum-walk\",\"n\":8,\"coin\":{\"kind\":\"random\",\"t\":0.5,\"phases\":{\"kind\":\"uniform-full\"}}}";
    if (uniloc_model_build(model, 1, 0, &m) != UNILOC_STATUS_OK) {
        fprintf(stderr, "%s\n", uniloc_last_error());
        return 1;
    }
    double res = 1.0;
    uniloc_matrix_unitarity_residual(m, &res);
    UnilocComplex g[16];
    UnilocComplex z = {1.0, 0.0};
    UnilocStatus st = uniloc_matrix_resolvent_column(m, z, 0, g, 16);
    printf("%zu %d %d\n", uniloc_matrix_dim(m), res < 1e-12, st == UNILOC_STATUS_ON_UNIT_CIRCLE);
    uniloc_matrix_free(m);
    return 0;
}
"#;

fn cc() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc).arg("--version").output().ok().filter(|o| o.status.success()).map(|_| cc)
}

#[test]
fn header_compiles_as_c() {
    let Some(cc) = cc() else {
        eprintln!("no C compiler; skipped");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let inc = header().parent().unwrap().to_path_buf();
    let st = Command::new(&cc).args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"]).arg(&inc).arg(&src).status().unwrap();
    assert!(st.success());

    // Link against the static library when cargo has produced it next to the
    // test binary.
    let target = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = target.join("libuniloc_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; link step skipped", lib.display());
        return;
    }
    let exe = dir.path().join("main");
    let out = Command::new(&cc)
        .arg("-I")
        .arg(&inc)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "16 1 1");
}
