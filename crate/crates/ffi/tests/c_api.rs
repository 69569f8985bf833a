use std::ffi::{CStr, CString};
use std::ptr;

use hcf_fwm_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(hcf_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

struct Handle(*mut HcfConfig);

impl Handle {
    fn reference() -> Self {
        let mut h = ptr::null_mut();
        assert_eq!(unsafe { hcf_config_new_reference(&mut h) }, HcfStatus::Ok);
        assert!(!h.is_null());
        Handle(h)
    }
}

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { hcf_config_free(self.0) };
    }
}

#[test]
fn signal_wavelength_matches_core() {
    let mut out = 0.0;
    assert_eq!(unsafe { hcf_signal_wavelength(938.0, 1538.0, 863.0, &mut out) }, HcfStatus::Ok);
    assert_eq!(out, hcf_fwm::phasematch::signal_wavelength(938.0, 1538.0, 863.0).unwrap());

    let h = Handle::reference();
    let mut from_cfg = 0.0;
    assert_eq!(unsafe { hcf_config_signal_wavelength(h.0, &mut from_cfg) }, HcfStatus::Ok);
    assert!((from_cfg - out).abs() < 1e-9);
}

#[test]
fn domain_errors_carry_messages() {
    let mut out = 0.0;
    let s = unsafe { hcf_signal_wavelength(1538.0, 938.0, 863.0, &mut out) };
    assert_eq!(s, HcfStatus::Domain);
    assert!(last_error().contains("stokes"), "{}", last_error());

    assert_eq!(unsafe { hcf_dead_time_correct(1e6, 1e-6, &mut out) }, HcfStatus::Domain);
    assert!(last_error().contains("saturated"));
}

#[test]
fn null_pointers_are_rejected() {
    let mut out = 0.0;
    assert_eq!(unsafe { hcf_delta_beta(ptr::null(), 1.0, &mut out) }, HcfStatus::NullPointer);
    assert_eq!(
        unsafe { hcf_signal_wavelength(938.0, 1538.0, 863.0, ptr::null_mut()) },
        HcfStatus::NullPointer
    );
    assert_eq!(unsafe { hcf_config_new_reference(ptr::null_mut()) }, HcfStatus::NullPointer);
    unsafe { hcf_config_free(ptr::null_mut()) };
}

#[test]
fn mismatch_and_efficiency_agree_with_core() {
    let h = Handle::reference();
    let core = hcf_fwm::phasematch::ConversionConfig::reference();
    for p in [0.0, 12.0, 150.0] {
        let (mut db, mut eff) = (0.0, 0.0);
        assert_eq!(unsafe { hcf_delta_beta(h.0, p, &mut db) }, HcfStatus::Ok);
        assert_eq!(unsafe { hcf_efficiency(h.0, p, &mut eff) }, HcfStatus::Ok);
        assert_eq!(db, hcf_fwm::phasematch::delta_beta(&core, p).unwrap());
        assert_eq!(eff, hcf_fwm::phasematch::efficiency_relative(&core, p).unwrap());
    }
    let mut g = 0.0;
    assert_eq!(unsafe { hcf_gradient_factor(h.0, 12.0, 12.0, &mut g) }, HcfStatus::Ok);
    let s = hcf_fwm::phasematch::phase_matching_factor(
        hcf_fwm::phasematch::delta_beta(&core, 12.0).unwrap(),
        core.fiber.length_m,
    );
    assert!((g - s).abs() < 1e-9);
}

#[test]
fn setters_rederive_signal_and_scale_power() {
    let h = Handle::reference();
    let mut e1 = 0.0;
    unsafe { hcf_efficiency(h.0, 12.0, &mut e1) };
    assert_eq!(unsafe { hcf_config_set_power(h.0, HcfFieldRole::Probe, 2e-3) }, HcfStatus::Ok);
    let mut e2 = 0.0;
    unsafe { hcf_efficiency(h.0, 12.0, &mut e2) };
    assert!((e2 / e1 - 2.0).abs() < 1e-14);

    assert_eq!(unsafe { hcf_config_set_wavelengths(h.0, 938.0, 1538.0, 938.0) }, HcfStatus::Ok);
    let mut sig = 0.0;
    unsafe { hcf_config_signal_wavelength(h.0, &mut sig) };
    assert!((sig - 1538.0).abs() < 1e-9);
    assert_eq!(
        unsafe { hcf_config_set_wavelengths(h.0, 1538.0, 938.0, 863.0) },
        HcfStatus::Domain
    );
}

#[test]
fn sweep_fills_buffers() {
    let h = Handle::reference();
    let n = 301;
    let (mut p, mut e, mut v) = (vec![0.0; n], vec![0.0; n], vec![0u8; n]);
    let s = unsafe { hcf_pressure_sweep(h.0, 0.0, 300.0, n, p.as_mut_ptr(), e.as_mut_ptr(), v.as_mut_ptr(), n) };
    assert_eq!(s, HcfStatus::Ok);
    assert_eq!(p[0], 0.0);
    assert_eq!(p[n - 1], 300.0);
    assert!(v.iter().all(|&x| x == 1));
    assert!(e.contains(&1.0));
    let s = unsafe { hcf_pressure_sweep(h.0, 0.0, 300.0, n, p.as_mut_ptr(), e.as_mut_ptr(), v.as_mut_ptr(), n - 1) };
    assert_eq!(s, HcfStatus::BufferTooSmall);
}

#[test]
fn optimize_and_scalar_helpers() {
    let h = Handle::reference();
    let (mut p, mut e) = (0.0, 0.0);
    assert_eq!(unsafe { hcf_optimize_pressure(h.0, 0.0, 20.0, &mut p, &mut e) }, HcfStatus::Ok);
    assert!((7.0..17.0).contains(&p), "{p}");
    let mut r = 0.0;
    assert_eq!(unsafe { hcf_dead_time_correct(5e5, 1e-6, &mut r) }, HcfStatus::Ok);
    assert_eq!(r, 1e6);
    let mut f = 0.0;
    assert_eq!(unsafe { hcf_fidelity_from_visibility(0.92, &mut f) }, HcfStatus::Ok);
    assert!((f - 0.96).abs() < 1e-15);
    let v = unsafe { CStr::from_ptr(hcf_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn load_reports_missing_file() {
    let path = CString::new("/definitely/not/here.toml").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { hcf_config_load(path.as_ptr(), &mut h) }, HcfStatus::Io);
    assert!(h.is_null());

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.toml");
    std::fs::write(&file, "[model]\nchi3_amplitude = 3.0\n").unwrap();
    let path = CString::new(file.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { hcf_config_load(path.as_ptr(), &mut h) }, HcfStatus::Ok);
    unsafe { hcf_config_free(h) };
}

#[test]
fn header_is_valid_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/hcf_fwm.h");
    let text = std::fs::read_to_string(header).unwrap();
    for sym in ["hcf_config_new_reference", "hcf_pressure_sweep", "HCF_STATUS_DOMAIN", "typedef struct HcfConfig HcfConfig"] {
        assert!(text.contains(sym), "{sym}");
    }
    let Ok(status) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-x", "c", "-std=c99", "-Wall", "-Werror", header])
        .status()
    else {
        eprintln!("cc not available; syntax check skipped");
        return;
    };
    assert!(status.success());
}
