use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use maxwell_demon_ffi::*;

fn last_error() -> String {
    let p = demon_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn set(cfg: *mut DemonConfig, key: &str, value: f64) -> DemonStatus {
    let key = CString::new(key).unwrap();
    unsafe { demon_config_set_f64(cfg, key.as_ptr(), value) }
}

#[test]
fn ideal_run_through_the_c_interface() {
    let cfg = demon_config_new();
    unsafe {
        assert_eq!(demon_config_set_ideal(cfg, true), DemonStatus::Ok);
        assert_eq!(set(cfg, "p_e", 0.3), DemonStatus::Ok);
        let mut r = DemonReport::default();
        assert_eq!(demon_run(cfg, &mut r), DemonStatus::Ok);
        assert!(r.demon_on);
        assert!((r.heat_c - 0.3).abs() < 1e-9);
        assert!(r.residual.abs() < 1e-10);
        assert!((r.heat_q + r.heat_c).abs() < 1e-10);

        assert_eq!(demon_config_set_demon(cfg, false), DemonStatus::Ok);
        assert_eq!(demon_run(cfg, &mut r), DemonStatus::Ok);
        assert!(!r.demon_on);
        assert!(r.i_qc_d_readout.abs() < 1e-12);
        demon_config_free(cfg);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let cfg = demon_config_new();
    unsafe {
        assert_eq!(set(cfg, "p_e", 1.5), DemonStatus::InvalidArgument);
        assert!(last_error().contains("p_e"));
        assert_eq!(set(cfg, "bogus", 1.0), DemonStatus::InvalidArgument);
        assert!(last_error().contains("bogus"));
        assert_eq!(set(cfg, "n_max", 2.5), DemonStatus::InvalidArgument);
        assert_eq!(set(cfg, "eta_readout", -0.1), DemonStatus::InvalidArgument);

        assert_eq!(set(cfg, "n_max", 8.0), DemonStatus::Ok);
        let mut r = DemonReport::default();
        assert_eq!(demon_run(cfg, &mut r), DemonStatus::Truncation);
        assert!(last_error().contains("n_max >= 22"));

        assert_eq!(demon_run(ptr::null(), &mut r), DemonStatus::NullPointer);
        assert_eq!(demon_run(cfg, ptr::null_mut()), DemonStatus::NullPointer);
        assert_eq!(demon_config_set_f64(cfg, ptr::null(), 1.0), DemonStatus::NullPointer);
        demon_config_free(cfg);
        demon_config_free(ptr::null_mut());
    }
}

#[test]
fn sweep_handle_lifecycle() {
    let cfg = demon_config_new();
    unsafe {
        let mut sweep: *mut DemonSweep = ptr::null_mut();
        assert_eq!(demon_sweep(cfg, 9, 4.0, &mut sweep), DemonStatus::Ok);
        assert_eq!(demon_sweep_len(sweep), 9);
        let mut first = DemonReport::default();
        let mut last = DemonReport::default();
        assert_eq!(demon_sweep_get(sweep, 0, true, &mut first), DemonStatus::Ok);
        assert_eq!(demon_sweep_get(sweep, 8, false, &mut last), DemonStatus::Ok);
        assert!((first.delta_beta_tilde + 4.0).abs() < 1e-9);
        assert!((last.delta_beta_tilde - 4.0).abs() < 1e-9);
        // imperfect demon below the sign change
        assert!(first.heat_c < 0.0);
        assert_eq!(demon_sweep_get(sweep, 9, true, &mut first), DemonStatus::InvalidArgument);
        demon_sweep_free(sweep);
        assert_eq!(demon_sweep_len(ptr::null()), 0);
        assert_eq!(demon_sweep(cfg, 0, 4.0, &mut sweep), DemonStatus::InvalidArgument);
        demon_config_free(cfg);
    }
}

#[test]
fn monte_carlo_estimate_with_errors() {
    let cfg = demon_config_new();
    unsafe {
        demon_config_set_ideal(cfg, true);
        let mut est = DemonReport::default();
        let mut se = DemonReport::default();
        assert_eq!(demon_mc_estimate(cfg, 20_000, 4, 200, &mut est, &mut se), DemonStatus::Ok);
        let mut exact = DemonReport::default();
        demon_run(cfg, &mut exact);
        assert!(se.heat_c > 0.0);
        assert!((est.heat_c - exact.heat_c).abs() < 5.0 * se.heat_c);
        assert_eq!(demon_mc_estimate(cfg, 0, 4, 200, &mut est, ptr::null_mut()), DemonStatus::InvalidArgument);
        assert_eq!(demon_mc_estimate(cfg, 100, 4, 10, &mut est, &mut se), DemonStatus::InvalidArgument);
        demon_config_free(cfg);
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(demon_version()) }.to_str().unwrap();
    assert_eq!(v, maxwell_demon::VERSION);
}

fn compiler(name: &str) -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| name.to_string());
    Command::new(&cc).arg("--version").output().ok().map(|_| cc)
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/maxwell_demon.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for symbol in [
        "demon_config_new",
        "demon_config_free",
        "demon_config_set_f64",
        "demon_run",
        "demon_sweep_get",
        "demon_mc_estimate",
        "demon_last_error_message",
        "DEMON_STATUS_TRUNCATION",
    ] {
        assert!(text.contains(symbol), "{symbol} missing from header");
    }
    let Some(cc) = compiler("cc") else {
        eprintln!("no C compiler found; skipping syntax check");
        return;
    };
    for (lang, std) in [("c", "-std=c99"), ("c++", "-std=c++11")] {
        let out = Command::new(&cc)
            .args(["-fsyntax-only", "-Wall", "-Werror", std, "-x", lang])
            .arg(&header)
            .output()
            .unwrap();
        assert!(out.status.success(), "{lang}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
