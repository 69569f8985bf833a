//! C ABI over the conversion model.
//!
//! Every fallible function returns an [`HcfStatus`] and writes results through
//! out-pointers. On failure, `hcf_last_error_message` returns a description
//! that stays valid until the next failing call on the same thread.
//! Configurations are opaque handles created by `hcf_config_new_*` and
//! released with `hcf_config_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use hcf_fwm::config::RunConfig;
use hcf_fwm::detection;
use hcf_fwm::phasematch::{self, ConversionConfig, FieldRole, OpticalField, PhaseMatcher, PressureProfile};
use hcf_fwm::polarization;
use hcf_fwm::{Error, ErrorKind};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HcfStatus {
    Ok = 0,
    NullPointer = 1,
    Config = 2,
    Parse = 3,
    Numerical = 4,
    Domain = 5,
    Io = 6,
    BufferTooSmall = 7,
    InvalidArgument = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HcfFieldRole {
    Pump = 0,
    Stokes = 1,
    Probe = 2,
}

/// Opaque conversion configuration.
pub struct HcfConfig {
    inner: ConversionConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> HcfStatus {
    match e.kind() {
        ErrorKind::Config => HcfStatus::Config,
        ErrorKind::Parse => HcfStatus::Parse,
        ErrorKind::Numerical => HcfStatus::Numerical,
        ErrorKind::Domain => HcfStatus::Domain,
        ErrorKind::Io => HcfStatus::Io,
    }
}

fn guard<F: FnOnce() -> Result<(), (HcfStatus, String)>>(f: F) -> HcfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HcfStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            HcfStatus::Panic
        }
    }
}

fn lift<T>(r: hcf_fwm::Result<T>) -> Result<T, (HcfStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (HcfStatus, String) {
    (HcfStatus::NullPointer, format!("{what} is null"))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), (HcfStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    *out = value;
    Ok(())
}

unsafe fn config_ref<'a>(cfg: *const HcfConfig) -> Result<&'a ConversionConfig, (HcfStatus, String)> {
    cfg.as_ref().map(|c| &c.inner).ok_or_else(|| null("config"))
}

unsafe fn config_mut<'a>(cfg: *mut HcfConfig) -> Result<&'a mut ConversionConfig, (HcfStatus, String)> {
    cfg.as_mut().map(|c| &mut c.inner).ok_or_else(|| null("config"))
}

/// Message of the last failing call on this thread; empty if none.
#[no_mangle]
pub extern "C" fn hcf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Reference configuration (938/1538/863 nm, hydrogen, 27 cm fiber).
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn hcf_config_new_reference(out: *mut *mut HcfConfig) -> HcfStatus {
    guard(|| {
        let handle = Box::into_raw(Box::new(HcfConfig {
            inner: ConversionConfig::reference(),
        }));
        write(out, handle, "out").inspect_err(|_| drop(Box::from_raw(handle)))
    })
}

/// Loads a TOML run configuration.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hcf_config_load(path: *const c_char, out: *mut *mut HcfConfig) -> HcfStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| (HcfStatus::InvalidArgument, "path is not UTF-8".to_string()))?;
        let inner = lift(RunConfig::load(Path::new(path)).and_then(|c| c.conversion()))?;
        *out = Box::into_raw(Box::new(HcfConfig { inner }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `cfg` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hcf_config_free(cfg: *mut HcfConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Replaces the three input wavelengths, keeping powers. The signal is re-derived.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hcf_config_set_wavelengths(
    cfg: *mut HcfConfig,
    pump_nm: f64,
    stokes_nm: f64,
    probe_nm: f64,
) -> HcfStatus {
    guard(|| {
        let c = config_mut(cfg)?;
        let field = |role, wl, old: &OpticalField| {
            OpticalField::from_wavelength(role, wl, old.power_w).map(|mut f| {
                f.polarization = old.polarization;
                f
            })
        };
        let pump = lift(field(FieldRole::Pump, pump_nm, c.pump()))?;
        let stokes = lift(field(FieldRole::Stokes, stokes_nm, c.stokes()))?;
        let probe = lift(field(FieldRole::Probe, probe_nm, c.probe()))?;
        lift(c.set_fields(pump, stokes, probe))
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hcf_config_set_power(cfg: *mut HcfConfig, role: HcfFieldRole, power_w: f64) -> HcfStatus {
    guard(|| {
        let c = config_mut(cfg)?;
        let role = match role {
            HcfFieldRole::Pump => FieldRole::Pump,
            HcfFieldRole::Stokes => FieldRole::Stokes,
            HcfFieldRole::Probe => FieldRole::Probe,
        };
        lift(c.set_power(role, power_w))
    })
}

/// # Safety
/// `cfg` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hcf_config_signal_wavelength(cfg: *const HcfConfig, out: *mut f64) -> HcfStatus {
    guard(|| write(out, config_ref(cfg)?.signal().wavelength_nm(), "out"))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hcf_signal_wavelength(pump_nm: f64, stokes_nm: f64, probe_nm: f64, out: *mut f64) -> HcfStatus {
    guard(|| write(out, lift(phasematch::signal_wavelength(pump_nm, stokes_nm, probe_nm))?, "out"))
}

/// Phase mismatch at a uniform pressure, rad/m.
///
/// # Safety
/// `cfg` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hcf_delta_beta(cfg: *const HcfConfig, pressure_bar: f64, out: *mut f64) -> HcfStatus {
    guard(|| write(out, lift(phasematch::delta_beta(config_ref(cfg)?, pressure_bar))?, "out"))
}

/// Conversion efficiency in arbitrary units at a uniform pressure.
///
/// # Safety
/// `cfg` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hcf_efficiency(cfg: *const HcfConfig, pressure_bar: f64, out: *mut f64) -> HcfStatus {
    guard(|| write(out, lift(phasematch::efficiency_relative(config_ref(cfg)?, pressure_bar))?, "out"))
}

/// Phase-matching factor for a linear pressure drop along the fiber.
///
/// # Safety
/// `cfg` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hcf_gradient_factor(
    cfg: *const HcfConfig,
    inlet_bar: f64,
    outlet_bar: f64,
    out: *mut f64,
) -> HcfStatus {
    guard(|| {
        let c = config_ref(cfg)?;
        let profile = PressureProfile::linear(inlet_bar, outlet_bar, c.fiber.length_m);
        write(out, lift(PhaseMatcher::new(c).and_then(|m| m.gradient_factor(&profile)))?, "out")
    })
}

/// Uniform-pressure sweep into caller buffers of length `len`, which must equal
/// `steps`. Invalid grid points get `valid[i] = 0` and efficiency 0.
///
/// # Safety
/// `cfg` must be a live handle; each buffer must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn hcf_pressure_sweep(
    cfg: *const HcfConfig,
    p_min: f64,
    p_max: f64,
    steps: usize,
    pressure: *mut f64,
    efficiency: *mut f64,
    valid: *mut u8,
    len: usize,
) -> HcfStatus {
    guard(|| {
        let c = config_ref(cfg)?;
        if pressure.is_null() || efficiency.is_null() || valid.is_null() {
            return Err(null("output buffer"));
        }
        if len < steps {
            return Err((
                HcfStatus::BufferTooSmall,
                format!("buffers hold {len} values, sweep needs {steps}"),
            ));
        }
        let r = lift(phasematch::pressure_sweep(c, p_min, p_max, steps))?;
        let pressure = std::slice::from_raw_parts_mut(pressure, steps);
        let efficiency = std::slice::from_raw_parts_mut(efficiency, steps);
        let valid = std::slice::from_raw_parts_mut(valid, steps);
        pressure.copy_from_slice(&r.pressure_bar);
        efficiency.copy_from_slice(&r.efficiency);
        for (v, ok) in valid.iter_mut().zip(&r.valid) {
            *v = u8::from(*ok);
        }
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn hcf_optimize_pressure(
    cfg: *const HcfConfig,
    p_min: f64,
    p_max: f64,
    out_pressure: *mut f64,
    out_efficiency: *mut f64,
) -> HcfStatus {
    guard(|| {
        if out_pressure.is_null() || out_efficiency.is_null() {
            return Err(null("out"));
        }
        let (p, e) = lift(phasematch::optimize_pressure(config_ref(cfg)?, p_min, p_max))?;
        *out_pressure = p;
        *out_efficiency = e;
        Ok(())
    })
}

/// Non-paralyzable dead-time correction.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hcf_dead_time_correct(measured_cps: f64, dead_time_s: f64, out: *mut f64) -> HcfStatus {
    guard(|| write(out, lift(detection::dead_time_correct(measured_cps, dead_time_s))?, "out"))
}

/// State fidelity `(1 + V) / 2` from a fringe visibility.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hcf_fidelity_from_visibility(visibility: f64, out: *mut f64) -> HcfStatus {
    guard(|| write(out, lift(polarization::fidelity_from_visibility(visibility))?, "out"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hcf_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}
