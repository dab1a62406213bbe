use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::ptr;

use evolve_transport_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(et_last_error()) }.to_string_lossy().into_owned()
}

fn open(name: &str) -> *mut EtScenario {
    let name = CString::new(name).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { et_scenario_open(name.as_ptr(), &mut s) }, EtStatus::Ok);
    assert!(!s.is_null());
    s
}

#[test]
fn names_round_trip_through_open() {
    let count = et_scenario_count();
    assert!(count >= 10);
    for i in 0..count {
        let mut name: *mut c_char = ptr::null_mut();
        assert_eq!(unsafe { et_scenario_name(i, &mut name) }, EtStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(unsafe { et_scenario_open(name, &mut s) }, EtStatus::Ok);
        let (mut lo, mut hi) = (0.0, 0.0);
        assert_eq!(unsafe { et_scenario_time_window(s, &mut lo, &mut hi) }, EtStatus::Ok);
        assert!(lo < hi);
        unsafe {
            et_scenario_close(s);
            et_string_free(name);
        }
    }
    let mut name: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { et_scenario_name(count, &mut name) }, EtStatus::OutOfRange);
    assert!(name.is_null());
}

#[test]
fn unknown_scenario_sets_status_and_message() {
    let name = CString::new("moebius").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { et_scenario_open(name.as_ptr(), &mut s) }, EtStatus::UnknownScenario);
    assert!(s.is_null());
    assert!(last_error().contains("moebius"));
}

#[test]
fn null_pointers_are_rejected() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { et_scenario_open(ptr::null(), &mut s) }, EtStatus::NullPointer);
    let mut v = 0.0;
    assert_eq!(
        unsafe { et_normal_velocity(ptr::null(), 0.0, 0, ptr::null(), 0, &mut v) },
        EtStatus::NullPointer
    );
    unsafe {
        et_scenario_close(ptr::null_mut());
        et_string_free(ptr::null_mut());
    }
}

#[test]
fn dims_and_normal_of_cap() {
    let s = open("spherical-cap");
    let (mut m, mut d, mut charts) = (0, 0, 0);
    assert_eq!(unsafe { et_scenario_dims(s, &mut m, &mut d, &mut charts) }, EtStatus::Ok);
    assert_eq!((m, d, charts), (2, 3, 1));
    // azimuth 0: the normal points towards increasing polar angle
    let z = [0.0];
    let mut n = [0.0; 3];
    assert_eq!(
        unsafe { et_exterior_normal(s, 0.0, 0, z.as_ptr(), 1, n.as_mut_ptr(), 3) },
        EtStatus::Ok
    );
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!((n[0] - h).abs() < 1e-10 && n[1].abs() < 1e-10 && (n[2] + h).abs() < 1e-10);
    let mut v = 0.0;
    assert_eq!(unsafe { et_normal_velocity(s, 0.0, 0, z.as_ptr(), 1, &mut v) }, EtStatus::Ok);
    assert!((v - 0.1).abs() < 1e-12);
    assert_eq!(
        unsafe { et_exterior_normal(s, 0.0, 0, z.as_ptr(), 1, n.as_mut_ptr(), 2) },
        EtStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { et_normal_velocity(s, 0.0, 3, z.as_ptr(), 1, &mut v) },
        EtStatus::OutOfRange
    );
    assert_eq!(
        unsafe { et_normal_velocity(s, 0.0, 0, z.as_ptr(), 0, &mut v) },
        EtStatus::InvalidArgument
    );
    unsafe { et_scenario_close(s) };
}

#[test]
fn interval_endpoints_use_zero_length_parameters() {
    let s = open("static-interval");
    let mut v = [0.0; 1];
    assert_eq!(
        unsafe { et_exterior_normal(s, 0.0, 0, ptr::null(), 0, v.as_mut_ptr(), 1) },
        EtStatus::Ok
    );
    assert_eq!(v[0], -1.0);
    assert_eq!(
        unsafe { et_exterior_normal(s, 0.0, 1, ptr::null(), 0, v.as_mut_ptr(), 1) },
        EtStatus::Ok
    );
    assert_eq!(v[0], 1.0);
    unsafe { et_scenario_close(s) };
}

#[test]
fn verify_transport_fills_report() {
    let s = open("shrinking-disk");
    let field = CString::new("one").unwrap();
    let mut r = EtTransportReport::default();
    let st = unsafe { et_verify_transport(s, field.as_ptr(), 0.0, 1e-4, 16, &mut r) };
    assert_eq!(st, EtStatus::Ok);
    assert_eq!((r.passed, r.failed), (1, 0));
    let expected = -0.2 * std::f64::consts::PI;
    assert!((r.lhs - expected).abs() < 1e-8);
    assert!((r.rhs_boundary - expected).abs() < 1e-12);
    assert!(r.rhs_bulk.abs() < 1e-15);

    let st = unsafe { et_verify_transport(s, field.as_ptr(), 1.99999, 1e-4, 16, &mut r) };
    assert_eq!(st, EtStatus::WindowExceeded);
    let st = unsafe { et_verify_transport(s, field.as_ptr(), 0.0, 1e-4, 0, &mut r) };
    assert_eq!(st, EtStatus::InvalidArgument);
    unsafe { et_scenario_close(s) };
}

#[test]
fn run_all_rejects_bad_options() {
    let mut out: *mut c_char = ptr::null_mut();
    let mut passed = 0;
    let st = unsafe { et_run_all_json(0, 1e-4, 10, 1, 0, &mut out, &mut passed) };
    assert_eq!(st, EtStatus::InvalidArgument);
    assert!(out.is_null());
    let st = unsafe { et_run_all_json(16, -1.0, 10, 1, 0, &mut out, &mut passed) };
    assert_eq!(st, EtStatus::InvalidArgument);
}

#[test]
fn header_declares_every_entry_point() {
    let header = include_str!("../include/evolve_transport.h");
    for f in [
        "et_last_error",
        "et_string_free",
        "et_scenario_count",
        "et_scenario_name",
        "et_scenario_open",
        "et_scenario_close",
        "et_scenario_time_window",
        "et_scenario_dims",
        "et_normal_velocity",
        "et_exterior_normal",
        "et_verify_transport",
        "et_run_all_json",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(header.contains("typedef struct EtScenario EtScenario;"));
    assert!(header.contains("ET_STATUS_OK = 0"));
}

/// Compiles and runs a C program against the generated header and the static
/// library, when a C compiler is available.
#[test]
fn c_program_links_and_runs() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if std::process::Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler ({cc}); skipping");
        return;
    }
    let manifest = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test-binary>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|p| p.parent()).unwrap();
    let lib = profile_dir.join("libevolve_transport_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let status = std::process::Command::new(&cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = std::process::Command::new(&bin).output().unwrap();
    assert!(
        out.status.success(),
        "C program failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
