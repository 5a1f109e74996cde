use std::ffi::{c_char, CStr, CString};
use std::io::Write;
use std::path::Path;
use std::process::{Command, Stdio};
use std::ptr;

use nv_wgm_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    unsafe { nvw_last_error_message(buf.as_mut_ptr(), buf.len(), ptr::null_mut()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn read_string(f: impl Fn(*mut c_char, usize, *mut usize) -> NvwStatus) -> String {
    let mut needed = 0usize;
    assert_eq!(f(ptr::null_mut(), 0, &mut needed), NvwStatus::NullPointer);
    let mut small = vec![0 as c_char; 1];
    assert_eq!(f(small.as_mut_ptr(), small.len(), &mut needed), NvwStatus::BufferTooSmall);
    let mut buf = vec![0 as c_char; needed];
    assert_eq!(f(buf.as_mut_ptr(), buf.len(), ptr::null_mut()), NvwStatus::Ok);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap().to_owned()
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(nvw_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn params_and_rates() {
    let p = nvw_params_new_default();
    assert!(!p.is_null());
    let name = CString::new("kappa").unwrap();
    assert_eq!(unsafe { nvw_params_set(p, name.as_ptr(), 5e-4) }, NvwStatus::Ok);
    let mut r = NvwRates::default();
    assert_eq!(unsafe { nvw_effective_rates(p, &mut r) }, NvwStatus::Ok);
    assert!((r.theta - 0.1).abs() < 1e-12);
    assert!((r.xi - 1e-3).abs() < 1e-12);
    assert!((r.gamma_c - 5e-6).abs() < 1e-15);

    let bad = CString::new("no_such_field").unwrap();
    assert_eq!(unsafe { nvw_params_set(p, bad.as_ptr(), 1.0) }, NvwStatus::InvalidArgument);
    assert!(last_error().contains("no_such_field"));
    assert_eq!(unsafe { nvw_params_set(p, name.as_ptr(), -1.0) }, NvwStatus::InvalidArgument);
    // rejected update leaves the handle alone
    assert_eq!(unsafe { nvw_effective_rates(p, &mut r) }, NvwStatus::Ok);
    assert!((r.gamma_c - 5e-6).abs() < 1e-15);
    unsafe { nvw_params_free(p) };
}

#[test]
fn null_handles_are_reported() {
    let mut r = NvwRates::default();
    assert_eq!(unsafe { nvw_effective_rates(ptr::null(), &mut r) }, NvwStatus::NullPointer);
    assert!(last_error().contains("params"));
    unsafe { nvw_params_free(ptr::null_mut()) };
    unsafe { nvw_run_free(ptr::null_mut()) };
}

#[test]
fn lossless_raman_transfer_is_perfect() {
    let p = nvw_params_new_default();
    let (mut post, mut pre) = (0.0, 0.0);
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let s = unsafe { nvw_transfer_fidelity(p, NvwModel::EffectiveRaman, a, 0.0, 0.0, a, &mut post, &mut pre) };
    assert_eq!(s, NvwStatus::Ok, "{}", last_error());
    assert!((post - 1.0).abs() < 1e-6, "{post}");
    assert!(pre < post);
    let s = unsafe { nvw_transfer_fidelity(p, NvwModel::EffectiveRaman, 1.0, 0.0, 1.0, 0.0, &mut post, &mut pre) };
    assert_eq!(s, NvwStatus::InvalidArgument);
    unsafe { nvw_params_free(p) };
}

#[test]
fn run_config_round_trip() {
    let cfg = CString::new(
        r#"{"schema_version": 1, "scenario": "decay_check", "params": {"dimensionless": {"gamma_e0": 0.05}},
            "grid": {"n_samples": 11}, "output": "x"}"#,
    )
    .unwrap();
    let mut run: *mut NvwRun = ptr::null_mut();
    assert_eq!(unsafe { nvw_run_config(cfg.as_ptr(), true, 7, &mut run) }, NvwStatus::Ok, "{}", last_error());
    let csv = read_string(|b, l, w| unsafe { nvw_run_csv(run, b, l, w) });
    assert!(csv.starts_with("t,Pe,Pe_exact\n"));
    assert_eq!(csv.lines().count(), 12);
    let meta = read_string(|b, l, w| unsafe { nvw_run_meta_json(run, b, l, w) });
    assert!(meta.contains("\"seed\": 7"));
    unsafe { nvw_run_free(run) };

    let broken = CString::new("{\"schema_version\": 1").unwrap();
    assert_eq!(unsafe { nvw_run_config(broken.as_ptr(), false, 0, &mut run) }, NvwStatus::InvalidArgument);
    assert!(run.is_null());
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/nv_wgm.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in ["nvw_version", "nvw_run_config", "nvw_transfer_fidelity", "NVW_STATUS_BUFFER_TOO_SMALL", "typedef struct NvwParams NvwParams"] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let consumer = r#"
#include "nv_wgm.h"
int main(void) {
    NvwParams *p = nvw_params_new_default();
    NvwRates r;
    double f = 0.0;
    NvwStatus s = nvw_effective_rates(p, &r);
    s = nvw_transfer_fidelity(p, NVW_MODEL_NINE_LEVEL, 1.0, 0.0, 0.0, 0.0, &f, NULL);
    nvw_params_free(p);
    return s == NVW_STATUS_OK && r.strong_coupling ? 0 : 1;
}
"#;
    let include = header.parent().unwrap();
    let Ok(mut child) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c", "-"])
        .arg("-I")
        .arg(include)
        .stdin(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
    else {
        eprintln!("no C compiler; skipping syntax check");
        return;
    };
    child.stdin.take().unwrap().write_all(consumer.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
