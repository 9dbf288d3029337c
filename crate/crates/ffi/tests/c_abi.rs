use std::ffi::{c_int, c_void, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use vegasplus_ffi::*;

unsafe extern "C" fn linear(
    _: *mut c_void,
    points: *const f64,
    n: usize,
    dims: usize,
    out: *mut f64,
) -> c_int {
    let pts = std::slice::from_raw_parts(points, n * dims);
    let out = std::slice::from_raw_parts_mut(out, n);
    for (x, v) in pts.chunks_exact(dims).zip(out) {
        *v = x.iter().sum();
    }
    0
}

unsafe extern "C" fn constant(
    user: *mut c_void,
    _: *const f64,
    n: usize,
    _: usize,
    out: *mut f64,
) -> c_int {
    let value = *(user as *const f64);
    std::slice::from_raw_parts_mut(out, n).fill(value);
    0
}

unsafe extern "C" fn failing(_: *mut c_void, _: *const f64, _: usize, _: usize, _: *mut f64) -> c_int {
    7
}

unsafe extern "C" fn nan(_: *mut c_void, _: *const f64, n: usize, _: usize, out: *mut f64) -> c_int {
    std::slice::from_raw_parts_mut(out, n).fill(f64::NAN);
    0
}

struct Probe {
    busy: AtomicBool,
    overlaps: AtomicUsize,
    calls: AtomicUsize,
}

unsafe extern "C" fn probing(
    user: *mut c_void,
    points: *const f64,
    n: usize,
    dims: usize,
    out: *mut f64,
) -> c_int {
    let p = &*(user as *const Probe);
    if p.busy.swap(true, Ordering::SeqCst) {
        p.overlaps.fetch_add(1, Ordering::SeqCst);
    }
    p.calls.fetch_add(1, Ordering::SeqCst);
    std::thread::yield_now();
    let r = linear(ptr::null_mut(), points, n, dims, out);
    p.busy.store(false, Ordering::SeqCst);
    r
}

fn small_config(seed: u64) -> *mut VpConfig {
    let cfg = vp_config_new();
    unsafe {
        assert_eq!(vp_config_set_n_eval(cfg, 20_000), VpStatus::Ok);
        assert_eq!(vp_config_set_iterations(cfg, 5), VpStatus::Ok);
        assert_eq!(vp_config_set_seed(cfg, seed), VpStatus::Ok);
    }
    cfg
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(vp_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn callback_matches_builtin_linear() {
    let cfg = small_config(3);
    let lo = [0.0; 10];
    let hi = [1.0; 10];
    let mut a = ptr::null_mut();
    let mut b = ptr::null_mut();
    let name = CString::new("linear").unwrap();
    unsafe {
        let s = vp_integrate(cfg, Some(linear), ptr::null_mut(), 10, lo.as_ptr(), hi.as_ptr(), &mut a);
        assert_eq!(s, VpStatus::Ok, "{}", last_error());
        assert_eq!(vp_integrate_builtin(cfg, name.as_ptr(), &mut b), VpStatus::Ok);
        let (ma, mb) = (vp_result_mean(a), vp_result_mean(b));
        assert!((ma - mb).abs() <= 1e-12 * mb.abs(), "{ma} vs {mb}");
        assert!((ma - 5.0).abs() < 5.0 * vp_result_sigma(a));
        assert_eq!(vp_result_n_iterations(a), 5);
        let (mut est, mut sig, mut inc) = (0.0, 0.0, 0);
        assert_eq!(vp_result_iteration(a, 4, &mut est, &mut sig, &mut inc), VpStatus::Ok);
        assert!(est > 4.9 && sig > 0.0 && inc == 1);
        assert_eq!(
            vp_result_iteration(a, 5, &mut est, &mut sig, &mut inc),
            VpStatus::InvalidArgument
        );
        assert!(vp_result_chi2_dof(a).is_finite());
        vp_result_free(a);
        vp_result_free(b);
        vp_config_free(cfg);
    }
}

#[test]
fn constant_callback_gives_volume() {
    let cfg = small_config(1);
    let value = 2.0f64;
    let lo = [0.0, -1.0, 2.0];
    let hi = [1.0, 1.0, 5.0];
    let mut r = ptr::null_mut();
    unsafe {
        let s = vp_integrate(
            cfg,
            Some(constant),
            &value as *const f64 as *mut c_void,
            3,
            lo.as_ptr(),
            hi.as_ptr(),
            &mut r,
        );
        assert_eq!(s, VpStatus::Ok);
        assert!((vp_result_mean(r) - 12.0).abs() < 1e-12);
        assert_eq!(vp_result_sigma(r), 0.0);
        vp_result_free(r);
        vp_config_free(cfg);
    }
}

#[test]
fn failures_map_to_status_codes() {
    let cfg = small_config(1);
    let lo = [0.0; 2];
    let hi = [1.0; 2];
    let mut r = ptr::null_mut();
    unsafe {
        let s = vp_integrate(cfg, Some(failing), ptr::null_mut(), 2, lo.as_ptr(), hi.as_ptr(), &mut r);
        assert_eq!(s, VpStatus::CallbackFailed);
        assert!(last_error().contains("callback returned 7"), "{}", last_error());
        assert!(r.is_null());

        let s = vp_integrate(cfg, Some(nan), ptr::null_mut(), 2, lo.as_ptr(), hi.as_ptr(), &mut r);
        assert_eq!(s, VpStatus::NonFinite);
        assert!(r.is_null());

        let bad = [2.0, 0.0];
        let s = vp_integrate(cfg, Some(linear), ptr::null_mut(), 2, bad.as_ptr(), hi.as_ptr(), &mut r);
        assert_eq!(s, VpStatus::InvalidArgument);

        let s = vp_integrate(cfg, None, ptr::null_mut(), 2, lo.as_ptr(), hi.as_ptr(), &mut r);
        assert_eq!(s, VpStatus::NullPointer);
        let s = vp_integrate(ptr::null(), Some(linear), ptr::null_mut(), 2, lo.as_ptr(), hi.as_ptr(), &mut r);
        assert_eq!(s, VpStatus::NullPointer);

        let name = CString::new("nope").unwrap();
        assert_eq!(vp_integrate_builtin(cfg, name.as_ptr(), &mut r), VpStatus::UnknownIntegrand);
        assert!(last_error().contains("ridge"), "{}", last_error());

        assert_eq!(vp_config_set_skip(cfg, 5), VpStatus::Ok);
        let s = vp_integrate(cfg, Some(linear), ptr::null_mut(), 2, lo.as_ptr(), hi.as_ptr(), &mut r);
        assert_eq!(s, VpStatus::InvalidArgument);

        assert_eq!(vp_config_set_seed(ptr::null_mut(), 1), VpStatus::NullPointer);
        assert!(vp_result_mean(ptr::null()).is_nan());
        vp_result_free(ptr::null_mut());
        vp_config_free(ptr::null_mut());
        vp_config_free(cfg);
    }
}

#[test]
fn callbacks_are_serialized_unless_declared_safe() {
    let cfg = small_config(2);
    let probe = Probe {
        busy: AtomicBool::new(false),
        overlaps: AtomicUsize::new(0),
        calls: AtomicUsize::new(0),
    };
    let lo = [0.0; 4];
    let hi = [1.0; 4];
    let mut r = ptr::null_mut();
    unsafe {
        vp_config_set_workers(cfg, 4);
        let s = vp_integrate(
            cfg,
            Some(probing),
            &probe as *const Probe as *mut c_void,
            4,
            lo.as_ptr(),
            hi.as_ptr(),
            &mut r,
        );
        assert_eq!(s, VpStatus::Ok);
        assert!(probe.calls.load(Ordering::SeqCst) > 4);
        assert_eq!(probe.overlaps.load(Ordering::SeqCst), 0);
        let serial_mean = vp_result_mean(r);
        vp_result_free(r);

        vp_config_set_thread_safe_callback(cfg, 1);
        let s = vp_integrate(
            cfg,
            Some(probing),
            &probe as *const Probe as *mut c_void,
            4,
            lo.as_ptr(),
            hi.as_ptr(),
            &mut r,
        );
        assert_eq!(s, VpStatus::Ok);
        assert_eq!(vp_result_mean(r), serial_mean);
        vp_result_free(r);
        vp_config_free(cfg);
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(vp_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "vegasplus.h"

static int product(void *ud, const double *p, size_t n, size_t d, double *out) {
    (void)ud;
    for (size_t i = 0; i < n; i++) {
        out[i] = 1.0;
        for (size_t j = 0; j < d; j++) out[i] *= p[i * d + j];
    }
    return 0;
}

int main(void) {
    VpConfig *cfg = vp_config_new();
    vp_config_set_n_eval(cfg, 10000);
    vp_config_set_iterations(cfg, 5);
    double lo[2] = {0.0, 0.0}, hi[2] = {1.0, 1.0};
    VpResult *res = NULL;
    VpStatus s = vp_integrate(cfg, product, NULL, 2, lo, hi, &res);
    if (s != VP_STATUS_OK) { fprintf(stderr, "%s\n", vp_last_error()); return 1; }
    printf("%.6f %s\n", vp_result_mean(res), vp_version());
    vp_result_free(res);
    vp_config_free(cfg);
    return 0;
}
"#;

/// Compiles and runs a C program against the generated header and the
/// static library. Skipped when no C compiler or archive is available.
#[test]
fn header_compiles_and_links_from_c() {
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|p| p.parent()).unwrap();
    let archive = profile_dir.join("libvegasplus_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !archive.exists() {
        eprintln!("skipping: no cc or {} missing", archive.display());
        return;
    }
    let dir = std::env::temp_dir().join(format!("vp_c_abi_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("main.c");
    let bin = dir.join("main");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&bin)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mean: f64 = text.split_whitespace().next().unwrap().parse().unwrap();
    assert!((mean - 0.25).abs() < 1e-3, "{text}");
    let _ = std::fs::remove_dir_all(&dir);
}
