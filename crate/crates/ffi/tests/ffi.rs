use std::ffi::{CStr, CString};
use std::ptr;

use gdtau_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(gdtau_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn rational() -> *mut GdtauSymbol {
    let re = [0.3, 0.6];
    let mut sym = ptr::null_mut();
    let st = unsafe { gdtau_symbol_rational(re.as_ptr(), ptr::null(), 2, &mut sym) };
    assert_eq!(st, GdtauStatus::Ok);
    sym
}

/// cosh θ_d cosh θ_c − (d/c) sinh θ_d sinh θ_c with θ_x = t₁x + t₃x³.
fn two_soliton(t1: f64, t3: f64) -> f64 {
    let (d, c) = (0.3f64, 0.6f64);
    let td = t1 * d + t3 * d.powi(3);
    let tc = t1 * c + t3 * c.powi(3);
    td.cosh() * tc.cosh() - d / c * td.sinh() * tc.sinh()
}

#[test]
fn stable_tau_matches_the_two_soliton() {
    let sym = rational();
    assert_eq!(unsafe { gdtau_symbol_n(sym) }, 2);
    let t = [0.4, 0.0, -0.2];
    let (mut re, mut im, mut err) = (0.0, 0.0, 0.0);
    let st = unsafe { gdtau_tau_stable(sym, t.as_ptr(), 3, 1e-12, &mut re, &mut im, &mut err) };
    assert_eq!(st, GdtauStatus::Ok, "{}", last_error());
    let expect = two_soliton(0.4, -0.2);
    assert!((re - expect).abs() / expect < 1e-10 && im.abs() < 1e-12);
    assert!(last_error().is_empty());
    unsafe { gdtau_symbol_free(sym) };
}

#[test]
fn finite_tau_at_zero_is_one() {
    let sym = rational();
    let (mut re, mut im) = (0.0, 0.0);
    for nb in 1..=4 {
        let st = unsafe { gdtau_tau_numeric(sym, ptr::null(), 0, nb, &mut re, &mut im) };
        assert_eq!(st, GdtauStatus::Ok);
        assert!((re - 1.0).abs() < 1e-12 && im.abs() < 1e-12);
    }
    unsafe { gdtau_symbol_free(sym) };
}

#[test]
fn frozen_times_and_nulls_are_rejected() {
    let sym = rational();
    let t = [0.1, 0.5];
    let (mut re, mut im) = (0.0, 0.0);
    let st = unsafe { gdtau_tau_numeric(sym, t.as_ptr(), 2, 2, &mut re, &mut im) };
    assert_eq!(st, GdtauStatus::InvalidArgument);
    assert!(last_error().contains("t_2"));
    let st = unsafe { gdtau_tau_numeric(ptr::null(), t.as_ptr(), 1, 2, &mut re, &mut im) };
    assert_eq!(st, GdtauStatus::NullPointer);
    let st = unsafe { gdtau_tau_numeric(sym, t.as_ptr(), 1, 2, ptr::null_mut(), &mut im) };
    assert_eq!(st, GdtauStatus::NullPointer);
    unsafe { gdtau_symbol_free(sym) };
    unsafe { gdtau_symbol_free(ptr::null_mut()) };
}

#[test]
fn bad_symbol_parameters() {
    let re = [0.5, -0.2];
    let mut sym = ptr::null_mut();
    // a 2-covering needs an odd number of branch points
    let st = unsafe { gdtau_symbol_covering(re.as_ptr(), ptr::null(), 2, 2, &mut sym) };
    assert_eq!(st, GdtauStatus::InvalidArgument);
    assert!(sym.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn covering_factorization_certificate() {
    let re = [0.5, -0.2, 0.1];
    let im = [0.0, 0.3, -0.45];
    let mut sym = ptr::null_mut();
    let st = unsafe { gdtau_symbol_covering(re.as_ptr(), im.as_ptr(), 3, 2, &mut sym) };
    assert_eq!(st, GdtauStatus::Ok);
    let t = [0.5, 0.0, 0.1];
    let mut cert = GdtauFactorCertificate::default();
    let st = unsafe { gdtau_factorize(sym, t.as_ptr(), 3, &mut cert) };
    assert_eq!(st, GdtauStatus::Ok, "{}", last_error());
    assert!(cert.residual < 1e-8 && cert.det_plus_deviation < 1e-8 && cert.band > 0);
    unsafe { gdtau_symbol_free(sym) };
}

#[test]
fn run_reports_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[symbol]\nfamily = \"rational\"\nparams = [0.3]\n[run]\ntimes = [0.1, 0.2]\n").unwrap();
    let path = CString::new(cfg.to_str().unwrap()).unwrap();
    let out = CString::new(dir.path().join("out").to_str().unwrap()).unwrap();
    let mut code = -1;
    let st = unsafe { gdtau_run(path.as_ptr(), GdtauCommand::Tau, out.as_ptr(), 0, &mut code) };
    assert_eq!(st, GdtauStatus::Ok);
    assert_eq!(code, 2);

    std::fs::write(&cfg, "[symbol]\nfamily = \"rational\"\nparams = [0.3, 0.6]\n[run]\ntimes = [0.2]\n").unwrap();
    let st = unsafe { gdtau_run(path.as_ptr(), GdtauCommand::Factorize, out.as_ptr(), 0, &mut code) };
    assert_eq!(st, GdtauStatus::Ok);
    assert_eq!(code, 0);
    assert!(dir.path().join("out").join("t_minus.csv").exists());
}

#[test]
fn header_declares_every_export_and_compiles() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/gdtau.h");
    let text = std::fs::read_to_string(header).unwrap();
    for f in [
        "gdtau_last_error",
        "gdtau_symbol_rational",
        "gdtau_symbol_covering",
        "gdtau_symbol_free",
        "gdtau_symbol_n",
        "gdtau_tau_numeric",
        "gdtau_tau_stable",
        "gdtau_factorize",
        "gdtau_run",
    ] {
        assert!(text.contains(&format!("{f}(")), "{f} missing from the header");
    }
    let status = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", header])
        .status()
        .expect("a C compiler on PATH");
    assert!(status.success());
}
