use std::ffi::CStr;
use std::process::Command;
use std::ptr;

use fracdev_ffi::*;

fn last_error() -> String {
    let p = fracdev_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn process(kind: FracdevProcessKind, a: f64, h: f64, norm: bool) -> *mut FracdevProcess {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { fracdev_process_new(kind, a, h, norm, &mut p) }, FracdevStatus::Ok);
    p
}

fn seminorm(kind: FracdevNormKind, eta: f64, p: f64) -> *mut FracdevSeminorm {
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { fracdev_seminorm_new(kind, eta, p, f64::NAN, &mut s) },
        FracdevStatus::Ok,
        "{}",
        last_error()
    );
    s
}

#[test]
fn simulate_and_evaluate_round_trip() {
    let p = process(FracdevProcessKind::Lfsm, 1.5, 0.8, false);
    let mut path = ptr::null_mut();
    let st = unsafe { fracdev_simulate(p, 8, 3, 5, &mut path) };
    assert_eq!(st, FracdevStatus::Ok);
    let n = unsafe { fracdev_path_len(path) };
    assert_eq!(n, 257);
    assert_eq!(unsafe { fracdev_path_step(path) }, 1.0 / 256.0);
    let values = unsafe { std::slice::from_raw_parts(fracdev_path_values(path), n) };
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let sup = seminorm(FracdevNormKind::Sup, f64::NAN, f64::NAN);
    let mut v = 0.0;
    assert_eq!(unsafe { fracdev_seminorm_eval(sup, path, 0.0, 1.0, &mut v) }, FracdevStatus::Ok);
    assert_eq!(v, max);

    let mut again = ptr::null_mut();
    unsafe { fracdev_simulate(p, 8, 3, 5, &mut again) };
    let copy = unsafe { std::slice::from_raw_parts(fracdev_path_values(again), n) };
    assert_eq!(values, copy);

    let kind = unsafe { CStr::from_ptr(fracdev_process_kind_name(p)) };
    assert_eq!(kind.to_str().unwrap(), "lfsm");
    unsafe {
        fracdev_path_free(path);
        fracdev_path_free(again);
        fracdev_seminorm_free(sup);
        fracdev_process_free(p);
    }
}

#[test]
fn path_from_values_and_pvar() {
    let f = [0.0, 1.0, 0.0, -1.0, 0.0];
    let mut path = ptr::null_mut();
    assert_eq!(
        unsafe { fracdev_path_from_values(f.as_ptr(), f.len(), 1.0, &mut path) },
        FracdevStatus::Ok
    );
    let pv = seminorm(FracdevNormKind::Pvar, f64::NAN, 2.0);
    let mut v = 0.0;
    unsafe { fracdev_seminorm_eval(pv, path, 0.0, 1.0, &mut v) };
    // Best partition 0, 1, -1, 0: 1 + 4 + 1.
    assert!((v - 6f64.sqrt()).abs() < 1e-15, "{v}");
    let mut g = 0.0;
    assert_eq!(unsafe { fracdev_rate_gamma(pv, 0.75, &mut g) }, FracdevStatus::Ok);
    assert!((g - 2.0 / (1.5 - 1.0)).abs() < 1e-12);
    unsafe {
        fracdev_seminorm_free(pv);
        fracdev_path_free(path);
    }
}

#[test]
fn small_ball_matches_oracle() {
    let bm = process(FracdevProcessKind::Rlp, 2.0, 0.5, true);
    let sup = seminorm(FracdevNormKind::Sup, f64::NAN, f64::NAN);
    let eps = [0.7, 1.0];
    let (mut p, mut se, mut hits) = ([0.0; 2], [0.0; 2], [0u64; 2]);
    let st = unsafe {
        fracdev_small_ball(bm, sup, eps.as_ptr(), 2, 20_000, 9, 1, p.as_mut_ptr(), se.as_mut_ptr(), hits.as_mut_ptr())
    };
    assert_eq!(st, FracdevStatus::Ok);
    for i in 0..2 {
        let want = fracdev_bm_sup_oracle(eps[i]);
        assert!((p[i] - want).abs() < 4.0 * se[i], "{} vs {want}", p[i]);
        assert_eq!(p[i], hits[i] as f64 / 20_000.0);
    }
    unsafe {
        fracdev_seminorm_free(sup);
        fracdev_process_free(bm);
    }
}

#[test]
fn errors_set_status_and_message() {
    let mut p = ptr::null_mut();
    let st = unsafe { fracdev_process_new(FracdevProcessKind::Rlp, 2.5, 0.5, false, &mut p) };
    assert_eq!(st, FracdevStatus::InvalidParameter);
    assert!(p.is_null());
    assert!(last_error().contains("alpha") || last_error().contains("α"), "{}", last_error());

    let mut s = ptr::null_mut();
    let st = unsafe { fracdev_seminorm_new(FracdevNormKind::Pvar, f64::NAN, f64::NAN, f64::NAN, &mut s) };
    assert_eq!(st, FracdevStatus::InvalidParameter);

    let mut v = 0.0;
    let st = unsafe { fracdev_seminorm_eval(ptr::null(), ptr::null(), 0.0, 1.0, &mut v) };
    assert_eq!(st, FracdevStatus::NullPointer);

    let mut k = 0.0;
    assert_eq!(unsafe { fracdev_tauberian_constant(1.0, 1.0, &mut k) }, FracdevStatus::InvalidParameter);
    assert_eq!(unsafe { fracdev_tauberian_constant(1.0, 2.0, &mut k) }, FracdevStatus::Ok);
    assert_eq!(k, 0.25);
    assert!(fracdev_last_error().is_null());

    let sup = seminorm(FracdevNormKind::Sup, f64::NAN, f64::NAN);
    let mut g = 0.0;
    assert_eq!(unsafe { fracdev_rate_gamma(sup, 0.0, &mut g) }, FracdevStatus::NotApplicable);
    unsafe {
        fracdev_seminorm_free(sup);
        fracdev_path_free(ptr::null_mut());
        assert_eq!(fracdev_path_len(ptr::null()), 0);
    }
    let version = unsafe { CStr::from_ptr(fracdev_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

const C_PROGRAM: &str = r#"
#include "fracdev.h"
int main(void) {
    FracdevProcess *p = NULL;
    FracdevStatus st = fracdev_process_new(FRACDEV_PROCESS_KIND_RLP, 2.0, 0.5, true, &p);
    FracdevPath *path = NULL;
    if (st == FRACDEV_STATUS_OK) st = fracdev_simulate(p, 6, 0, 0, &path);
    double step = fracdev_path_step(path);
    fracdev_path_free(path);
    fracdev_process_free(p);
    return st == FRACDEV_STATUS_OK && step > 0.0 ? 0 : 1;
}
"#;

#[test]
fn header_compiles_as_c_and_cpp() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    for (compiler, extra) in [("cc", vec!["-std=c99"]), ("c++", vec!["-x", "c++"])] {
        let Ok(out) = Command::new(compiler)
            .args(&extra)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-I", include])
            .arg(&src)
            .output()
        else {
            eprintln!("{compiler} not available, skipped");
            continue;
        };
        assert!(out.status.success(), "{compiler}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
