//! Calls through the C ABI from Rust, plus a C program compiled against the generated header.

use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use zerovar_ffi::*;

fn kernel(json: &str) -> *mut ZvKernel {
    let spec = CString::new(json).unwrap();
    let mut k = ptr::null_mut();
    assert_eq!(unsafe { zv_kernel_from_json(spec.as_ptr(), &mut k) }, ZvStatus::Ok);
    assert!(!k.is_null());
    k
}

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    unsafe { zv_last_error(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(zv_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn kernel_queries() {
    let k = kernel(r#"{"catalog":"sinc"}"#);
    let (mut sigma, mut r, mut i) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(zv_kernel_sigma(k, &mut sigma), ZvStatus::Ok);
        assert_eq!(zv_kernel_covariance(k, 2.0, &mut r), ZvStatus::Ok);
        assert_eq!(zv_key_integral(k, 5.0, 1e-10, &mut i), ZvStatus::Ok);
        zv_kernel_free(k);
    }
    assert!((sigma - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    assert!((r - 2f64.sin() / 2.0).abs() < 1e-15);
    assert!((i - 0.3115845278510755).abs() < 1e-9);
}

#[test]
fn chaos_variance_and_simulation() {
    let k = kernel(r#"{"catalog":"gaussian"}"#);
    let (mut total, mut lb) = (0.0, 0.0);
    let mut m = ZvMoments::default();
    unsafe {
        assert_eq!(zv_variance_chaos(k, 5.0, &mut total, &mut lb), ZvStatus::Ok);
        assert_eq!(zv_variance_chaos(k, 5.0, &mut total, ptr::null_mut()), ZvStatus::Ok);
        assert_eq!(zv_simulate(k, 5.0, 0.01, 2000, 42, &mut m), ZvStatus::Ok);
        zv_kernel_free(k);
    }
    assert!(lb > 0.0 && total >= lb);
    let expect = 5.0 * 2f64.sqrt() / std::f64::consts::PI;
    assert!((m.mean - expect).abs() <= 4.0 * m.mean_se, "{m:?}");
    assert!((m.var - total).abs() <= (0.1 * total).max(4.0 * m.var_se), "{m:?} vs {total}");
}

#[test]
fn identities_pass() {
    let mut failures = u32::MAX;
    assert_eq!(unsafe { zv_verify_identities(6, &mut failures) }, ZvStatus::Ok);
    assert_eq!(failures, 0);
}

#[test]
fn errors_are_reported() {
    let mut k = ptr::null_mut();
    let bad = CString::new(r#"{"catalog":"nonesuch"}"#).unwrap();
    assert_eq!(unsafe { zv_kernel_from_json(bad.as_ptr(), &mut k) }, ZvStatus::UnknownCatalog);
    assert!(k.is_null());
    assert!(last_error().contains("nonesuch"));

    let garbled = CString::new("{").unwrap();
    assert_eq!(unsafe { zv_kernel_from_json(garbled.as_ptr(), &mut k) }, ZvStatus::MalformedSpec);
    assert_eq!(unsafe { zv_kernel_from_json(ptr::null(), &mut k) }, ZvStatus::NullPointer);

    let mut v = 0.0;
    assert_eq!(unsafe { zv_kernel_sigma(ptr::null(), &mut v) }, ZvStatus::NullPointer);
    let g = kernel(r#"{"catalog":"gaussian"}"#);
    assert_eq!(unsafe { zv_key_integral(g, -1.0, 1e-8, &mut v) }, ZvStatus::ParameterOutOfRange);
    let needed = unsafe { zv_last_error(ptr::null_mut(), 0) };
    assert!(needed > 0);
    let mut tiny = [1 as c_char; 4];
    assert_eq!(unsafe { zv_last_error(tiny.as_mut_ptr(), tiny.len()) }, needed);
    assert_eq!(tiny[3], 0);
    assert_eq!(unsafe { zv_kernel_sigma(g, &mut v) }, ZvStatus::Ok);
    assert_eq!(unsafe { zv_last_error(ptr::null_mut(), 0) }, 0);
    unsafe {
        zv_kernel_free(g);
        zv_kernel_free(ptr::null_mut());
    }
}

/// Directory holding the library artifacts of the current profile.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(|deps| deps.parent()).unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let dir = artifact_dir();
    // Test builds only produce the rlib, so build the static library for the same profile.
    let mut build = Command::new(env!("CARGO"));
    build.args(["build", "--quiet", "--lib", "-p", "zerovar-ffi"]);
    if dir.file_name().is_some_and(|n| n == "release") {
        build.arg("--release");
    }
    assert!(build.status().expect("cargo is available").success());
    let lib = dir.join("libzerovar_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let exe = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("zerovar_smoke");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(root.join("include"))
        .arg(root.join("tests").join("smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler is available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout.contains("sigma=0.57735"), "{stdout}");
    assert!(stdout.contains("status=4"), "{stdout}");
}
