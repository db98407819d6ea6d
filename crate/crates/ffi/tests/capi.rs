use std::ffi::{c_char, CStr, CString};
use std::ptr;

use awgauss_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    let mut needed = 0usize;
    unsafe {
        assert_eq!(aw_last_error_message(buf.as_mut_ptr(), buf.len(), &mut needed), AwStatus::Ok);
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn grid(nodes: usize) -> *mut AwGrid {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { aw_grid_new(nodes, AwScheme::Midpoint, &mut g) }, AwStatus::Ok);
    g
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(aw_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn discrete_identity_against_scaled() {
    let a = [1.0, 0.0, 0.0, 1.0];
    let b = [4.0, 0.0, 0.0, 4.0];
    let (mut ca, mut cb, mut rep) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
    let mut d = f64::NAN;
    let mut corr = [0.0; 2];
    let mut n = 0usize;
    unsafe {
        assert_eq!(aw_covariance_new(a.as_ptr(), 2, &mut ca), AwStatus::Ok);
        assert_eq!(aw_covariance_new(b.as_ptr(), 2, &mut cb), AwStatus::Ok);
        assert_eq!(aw_discrete(ca, cb, &mut rep), AwStatus::Ok);
        assert_eq!(aw_report_distance_squared(rep, &mut d), AwStatus::Ok);
        assert_eq!(aw_report_correlation(rep, corr.as_mut_ptr(), 2, &mut n), AwStatus::Ok);
        aw_report_free(rep);
        aw_covariance_free(ca);
        aw_covariance_free(cb);
    }
    assert!((d - 2.0).abs() < 1e-12, "{d}");
    assert_eq!(n, 2);
    assert_eq!(corr, [1.0, 1.0]);
}

#[test]
fn bad_covariance_reports_validation() {
    let a = [1.0, 2.0, 0.0, 1.0];
    let mut c = ptr::null_mut();
    let s = unsafe { aw_covariance_new(a.as_ptr(), 2, &mut c) };
    assert_eq!(s, AwStatus::InvalidInput);
    assert!(c.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn null_arguments_are_rejected() {
    let mut d = 0.0;
    unsafe {
        assert_eq!(aw_report_distance_squared(ptr::null(), &mut d), AwStatus::NullPointer);
        assert_eq!(aw_covariance_new(ptr::null(), 2, ptr::null_mut()), AwStatus::NullPointer);
        aw_report_free(ptr::null_mut());
    }
    assert!(last_error().contains("null"));
}

#[test]
fn fbm_distance_and_json() {
    let g = grid(128);
    let mut rep = ptr::null_mut();
    let mut d = 0.0;
    unsafe {
        assert_eq!(aw_fbm(0.5, 0.75, 1.0, g, &mut rep), AwStatus::Ok);
        assert_eq!(aw_report_distance_squared(rep, &mut d), AwStatus::Ok);
        let mut needed = 0usize;
        assert_eq!(aw_report_to_json(rep, ptr::null_mut(), 0, &mut needed), AwStatus::BufferTooSmall);
        let mut buf = vec![0 as c_char; needed];
        assert_eq!(aw_report_to_json(rep, buf.as_mut_ptr(), buf.len(), &mut needed), AwStatus::Ok);
        let text = CStr::from_ptr(buf.as_ptr()).to_str().unwrap();
        let v: serde_json::Value = serde_json::from_str(text).unwrap();
        assert_eq!(v["distance_squared"].as_f64().unwrap(), d);
        aw_report_free(rep);
        aw_grid_free(g);
    }
    assert!((d - 0.0551).abs() < 1e-3, "{d}");
}

#[test]
fn unit_from_json_matches_fbm_handle() {
    let g = grid(64);
    let (mut p1, mut p2, mut r1, mut r2) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
    let (mut d1, mut d2) = (0.0, 0.0);
    unsafe {
        assert_eq!(aw_process_fbm(0.6, 1.0, &mut p1), AwStatus::Ok);
        assert_eq!(aw_process_fbm(0.8, 1.0, &mut p2), AwStatus::Ok);
        assert_eq!(aw_unit(p1, p2, g, &mut r1), AwStatus::Ok);
        assert_eq!(aw_fbm(0.6, 0.8, 1.0, g, &mut r2), AwStatus::Ok);
        aw_report_distance_squared(r1, &mut d1);
        aw_report_distance_squared(r2, &mut d2);
        for r in [r1, r2] {
            aw_report_free(r);
        }
        aw_process_free(p1);
        aw_process_free(p2);
        aw_grid_free(g);
    }
    assert!((d1 - d2).abs() < 1e-9 * d2.max(1.0), "{d1} vs {d2}");

    let bad = CString::new("{\"components\": 3}").unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { aw_process_from_json(bad.as_ptr(), &mut p) }, AwStatus::InvalidInput);
}

#[test]
fn martingale_handle() {
    let g = grid(128);
    let mut m = ptr::null_mut();
    let (mut d, mut rho) = (0.0, 0.0);
    unsafe {
        assert_eq!(aw_mart_approx(0.7, 1.0, g, &mut m), AwStatus::Ok);
        assert_eq!(aw_martingale_distance_squared(m, &mut d), AwStatus::Ok);
        assert_eq!(aw_martingale_rho_at(m, 0.5, &mut rho), AwStatus::Ok);
        aw_martingale_free(m);
        assert_eq!(aw_mart_approx(1.2, 1.0, g, &mut m), AwStatus::InvalidInput);
        aw_grid_free(g);
    }
    assert!(d > 0.0 && d < 0.1, "{d}");
    assert!((rho - 0.8048).abs() < 5e-3, "{rho}");
}

#[test]
fn simulate_returns_estimates() {
    let sc = CString::new(r#"{"h1": 0.5, "h2": 0.5, "T": 1.0, "M": 8, "n_paths": 16, "seed": 3}"#).unwrap();
    let mut buf = vec![0 as c_char; 4096];
    let mut needed = 0usize;
    let s = unsafe { aw_simulate_json(sc.as_ptr(), buf.as_mut_ptr(), buf.len(), &mut needed) };
    assert_eq!(s, AwStatus::Ok, "{}", last_error());
    let text = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
    let v: serde_json::Value = serde_json::from_str(text).unwrap();
    assert_eq!(v[0]["mean"].as_f64().unwrap(), 0.0);
}

#[test]
fn header_declares_the_api_and_compiles() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let header = std::fs::read_to_string(format!("{dir}/include/awgauss.h")).unwrap();
    for name in ["aw_version", "aw_last_error_message", "aw_discrete", "aw_fbm", "aw_unit", "aw_multi", "aw_simulate_json", "typedef struct AwReport AwReport"] {
        assert!(header.contains(name), "{name} missing from header");
    }
    let Ok(cc) = which_cc() else { return };
    let src = std::env::temp_dir().join(format!("awgauss_header_{}.c", std::process::id()));
    std::fs::write(&src, "#include \"awgauss.h\"\nint main(void) { AwReport *r = 0; aw_report_free(r); return AW_STATUS_OK; }\n").unwrap();
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(format!("{dir}/include"))
        .arg(&src)
        .status()
        .unwrap();
    let _ = std::fs::remove_file(&src);
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc);
        }
    }
    Err(())
}
