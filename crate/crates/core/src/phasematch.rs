//! Propagation constants, the four-wave phase mismatch, the sinc² conversion
//! law and its pressure-gradient generalization, pressure sweeps and pressure
//! optimization.
//!
//! Sign convention for the mismatch:
//!
//! ```text
//! Δβ = −β_pump + β_stokes + β_probe − β_signal
//! ```
//!
//! with `ν_signal = ν_probe − (ν_pump − ν_stokes)`, so vacuum-like indices
//! cancel and Δβ is set by waveguide and gas dispersion alone.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::constants::{nm_from_thz, thz_from_nm, NM};
use crate::dispersion::{
    FiberGeometry, FiberModel, GasDispersionData, GasState, IndexOptions, ModeSpec,
};
use crate::error::{Error, Result};
use crate::polarization::JonesVector;
use crate::quadrature::{self, Tolerance};
use crate::ramanline::{self, RamanTransition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldRole {
    Pump,
    Stokes,
    Probe,
    Signal,
}

impl fmt::Display for FieldRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldRole::Pump => "pump",
            FieldRole::Stokes => "stokes",
            FieldRole::Probe => "probe",
            FieldRole::Signal => "signal",
        })
    }
}

/// A monochromatic field. The frequency is the stored quantity; the vacuum
/// wavelength is always derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalField {
    role: FieldRole,
    frequency_thz: f64,
    pub power_w: f64,
    pub polarization: JonesVector,
}

impl OpticalField {
    pub fn from_wavelength(role: FieldRole, wavelength_nm: f64, power_w: f64) -> Result<Self> {
        if !(wavelength_nm > 0.0) || !wavelength_nm.is_finite() {
            return Err(Error::domain(format!(
                "{role} wavelength must be positive, got {wavelength_nm} nm"
            )));
        }
        Self::from_frequency(role, thz_from_nm(wavelength_nm), power_w)
    }

    pub fn from_frequency(role: FieldRole, frequency_thz: f64, power_w: f64) -> Result<Self> {
        if !(frequency_thz > 0.0) || !frequency_thz.is_finite() {
            return Err(Error::domain(format!(
                "{role} frequency must be positive, got {frequency_thz} THz"
            )));
        }
        if !(power_w >= 0.0) || !power_w.is_finite() {
            return Err(Error::domain(format!(
                "{role} power must be >= 0, got {power_w} W"
            )));
        }
        Ok(Self {
            role,
            frequency_thz,
            power_w,
            polarization: JonesVector::horizontal(),
        })
    }

    pub fn role(&self) -> FieldRole {
        self.role
    }

    pub fn frequency_thz(&self) -> f64 {
        self.frequency_thz
    }

    pub fn wavelength_nm(&self) -> f64 {
        nm_from_thz(self.frequency_thz)
    }
}

impl Serialize for OpticalField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("OpticalField", 5)?;
        st.serialize_field("role", &self.role)?;
        st.serialize_field("frequency_thz", &self.frequency_thz)?;
        st.serialize_field("wavelength_nm", &self.wavelength_nm())?;
        st.serialize_field("power_w", &self.power_w)?;
        let p = &self.polarization;
        st.serialize_field("polarization", &[[p.h().re, p.h().im], [p.v().re, p.v().im]])?;
        st.end()
    }
}

/// Frequency of the converted field, `ν_probe − (ν_pump − ν_stokes)`, THz.
pub fn signal_frequency_thz(pump_thz: f64, stokes_thz: f64, probe_thz: f64) -> Result<f64> {
    let beat = pump_thz - stokes_thz;
    if !(beat > 0.0) {
        return Err(Error::domain(format!(
            "pump ({pump_thz} THz) must lie above stokes ({stokes_thz} THz)"
        )));
    }
    let signal = probe_thz - beat;
    if !(signal > 0.0) {
        return Err(Error::domain(format!(
            "signal frequency {signal} THz is not positive: probe below the Raman beat"
        )));
    }
    Ok(signal)
}

/// Signal wavelength (nm) from pump, Stokes and probe wavelengths (nm).
pub fn signal_wavelength(pump_nm: f64, stokes_nm: f64, probe_nm: f64) -> Result<f64> {
    for (name, wl) in [("pump", pump_nm), ("stokes", stokes_nm), ("probe", probe_nm)] {
        if !(wl > 0.0) || !wl.is_finite() {
            return Err(Error::domain(format!("{name} wavelength must be positive")));
        }
    }
    signal_frequency_thz(thz_from_nm(pump_nm), thz_from_nm(stokes_nm), thz_from_nm(probe_nm))
        .map(nm_from_thz)
}

/// How each field's effective index is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum IndexModel {
    /// Capillary fiber model with the gas of the configuration.
    Fiber(IndexOptions),
    /// The same fixed effective index for every field and pressure.
    Uniform { n_eff: f64 },
}

impl Default for IndexModel {
    fn default() -> Self {
        IndexModel::Fiber(IndexOptions::default())
    }
}

/// Source of the |χ⁽³⁾|² prefactor in the conversion law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chi3Model {
    /// `|χ³|² = chi3_amplitude²`, independent of pressure.
    #[default]
    Constant,
    /// On-resonance Lorentzian of the Raman line (pressure dependent), scaled by `chi3_amplitude`.
    RamanLine,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConversionConfig {
    pump: OpticalField,
    stokes: OpticalField,
    probe: OpticalField,
    signal: OpticalField,
    pub fiber: FiberGeometry,
    pub gas: GasState,
    pub dispersion_data: GasDispersionData,
    pub mode: ModeSpec,
    pub index: IndexModel,
    pub raman: RamanTransition,
    pub chi3_amplitude: f64,
    pub chi3_model: Chi3Model,
    /// Allowed |ν_pump − ν_stokes − ν_Raman| before a warning, GHz.
    pub beat_window_ghz: f64,
}

impl ConversionConfig {
    pub fn new(
        pump: OpticalField,
        stokes: OpticalField,
        probe: OpticalField,
        fiber: FiberGeometry,
        gas: GasState,
        dispersion_data: GasDispersionData,
        raman: RamanTransition,
    ) -> Result<Self> {
        let signal = Self::derive_signal(&pump, &stokes, &probe)?;
        let cfg = Self {
            pump,
            stokes,
            probe,
            signal,
            fiber,
            gas,
            dispersion_data,
            mode: ModeSpec::he11(),
            index: IndexModel::default(),
            raman,
            chi3_amplitude: 1.0,
            chi3_model: Chi3Model::Constant,
            beat_window_ghz: 50.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// 938 nm pump and 1538 nm Stokes at 50 mW each, 1 mW probe at 863 nm,
    /// in the 27 cm single-ring fiber filled with hydrogen.
    pub fn reference() -> Self {
        let pump = OpticalField::from_wavelength(FieldRole::Pump, 938.0, 0.05).unwrap();
        let stokes = OpticalField::from_wavelength(FieldRole::Stokes, 1538.0, 0.05).unwrap();
        let probe = OpticalField::from_wavelength(FieldRole::Probe, 863.0, 1e-3).unwrap();
        Self::new(
            pump,
            stokes,
            probe,
            FiberGeometry::reference(),
            GasState::hydrogen(12.0, crate::constants::ROOM_TEMPERATURE_K),
            GasDispersionData::hydrogen(),
            RamanTransition::hydrogen_q11(),
        )
        .expect("reference configuration is valid")
    }

    fn derive_signal(pump: &OpticalField, stokes: &OpticalField, probe: &OpticalField) -> Result<OpticalField> {
        for (f, role) in [
            (pump, FieldRole::Pump),
            (stokes, FieldRole::Stokes),
            (probe, FieldRole::Probe),
        ] {
            if f.role != role {
                return Err(Error::config(format!(
                    "field supplied as {role} has role {}",
                    f.role
                )));
            }
        }
        let nu = signal_frequency_thz(pump.frequency_thz, stokes.frequency_thz, probe.frequency_thz)?;
        let mut signal = OpticalField::from_frequency(FieldRole::Signal, nu, 0.0)?;
        signal.polarization = probe.polarization;
        Ok(signal)
    }

    pub fn validate(&self) -> Result<()> {
        self.fiber.validate()?;
        self.gas.validate()?;
        self.mode.validate()?;
        self.raman.validate()?;
        self.dispersion_data.validate()?;
        if !self.chi3_amplitude.is_finite() {
            return Err(Error::config("chi3 amplitude must be finite"));
        }
        if !(self.beat_window_ghz >= 0.0) {
            return Err(Error::config("beat window must be non-negative"));
        }
        if let IndexModel::Uniform { n_eff } = self.index {
            if !(n_eff > 0.0) {
                return Err(Error::config("uniform effective index must be positive"));
            }
        }
        Ok(())
    }

    /// Non-fatal configuration issues.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let offset_ghz = (self.beat_thz() - self.raman.shift_frequency_thz) * 1e3;
        if offset_ghz.abs() > self.beat_window_ghz {
            out.push(format!(
                "pump-stokes beat {:.4} THz is {offset_ghz:.1} GHz from the Raman shift {} THz \
                 (window ±{} GHz)",
                self.beat_thz(),
                self.raman.shift_frequency_thz,
                self.beat_window_ghz
            ));
        }
        out
    }

    pub fn beat_thz(&self) -> f64 {
        self.pump.frequency_thz - self.stokes.frequency_thz
    }

    pub fn pump(&self) -> &OpticalField {
        &self.pump
    }

    pub fn stokes(&self) -> &OpticalField {
        &self.stokes
    }

    pub fn probe(&self) -> &OpticalField {
        &self.probe
    }

    pub fn signal(&self) -> &OpticalField {
        &self.signal
    }

    pub fn fields(&self) -> [&OpticalField; 4] {
        [&self.pump, &self.stokes, &self.probe, &self.signal]
    }

    /// Replaces pump, Stokes and probe; the signal is re-derived.
    pub fn set_fields(&mut self, pump: OpticalField, stokes: OpticalField, probe: OpticalField) -> Result<()> {
        self.signal = Self::derive_signal(&pump, &stokes, &probe)?;
        self.pump = pump;
        self.stokes = stokes;
        self.probe = probe;
        Ok(())
    }

    pub fn set_power(&mut self, role: FieldRole, power_w: f64) -> Result<()> {
        if !(power_w >= 0.0) || !power_w.is_finite() {
            return Err(Error::domain(format!("{role} power must be >= 0")));
        }
        match role {
            FieldRole::Pump => self.pump.power_w = power_w,
            FieldRole::Stokes => self.stokes.power_w = power_w,
            FieldRole::Probe => self.probe.power_w = power_w,
            FieldRole::Signal => {
                return Err(Error::config("signal power is an output, not an input"))
            }
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form of the configuration.
    pub fn config_hash(&self) -> String {
        hash_json(self)
    }
}

pub(crate) fn hash_json<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("configuration serializes");
    Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Prepared evaluator: the fiber model and resonance table are built once.
#[derive(Debug, Clone)]
pub struct PhaseMatcher<'a> {
    config: &'a ConversionConfig,
    fiber: Option<FiberModel>,
}

impl<'a> PhaseMatcher<'a> {
    pub fn new(config: &'a ConversionConfig) -> Result<Self> {
        config.validate()?;
        let fiber = match config.index {
            IndexModel::Fiber(options) => Some(FiberModel::new(&config.fiber, &config.mode, options)?),
            IndexModel::Uniform { .. } => None,
        };
        Ok(Self { config, fiber })
    }

    pub fn config(&self) -> &ConversionConfig {
        self.config
    }

    pub fn n_eff(&self, field: &OpticalField, pressure_bar: f64) -> Result<f64> {
        match (&self.fiber, self.config.index) {
            (_, IndexModel::Uniform { n_eff }) => Ok(n_eff),
            (Some(model), _) => {
                let gas = self.config.gas.with_pressure(pressure_bar);
                model.n_eff(&gas, &self.config.dispersion_data, field.wavelength_nm())
            }
            (None, _) => unreachable!("fiber model exists for the fiber index model"),
        }
    }

    pub fn beta(&self, field: &OpticalField, pressure_bar: f64) -> Result<f64> {
        let n = self
            .n_eff(field, pressure_bar)
            .map_err(|e| Error::Field {
                role: field.role,
                source: Box::new(e),
            })?;
        Ok(2.0 * PI / (field.wavelength_nm() * NM) * n)
    }

    pub fn delta_beta(&self, pressure_bar: f64) -> Result<f64> {
        let c = self.config;
        Ok(-self.beta(&c.pump, pressure_bar)? + self.beta(&c.stokes, pressure_bar)?
            + self.beta(&c.probe, pressure_bar)?
            - self.beta(&c.signal, pressure_bar)?)
    }

    /// `|χ³|² L² P_pump P_stokes P_probe`, everything except the phase-matching factor.
    pub fn prefactor(&self, pressure_bar: f64) -> Result<f64> {
        let c = self.config;
        let chi2 = match c.chi3_model {
            Chi3Model::Constant => c.chi3_amplitude * c.chi3_amplitude,
            Chi3Model::RamanLine => {
                if pressure_bar == 0.0 {
                    0.0
                } else {
                    let on_resonance = ramanline::collisional_shift_mhz(&c.raman, pressure_bar);
                    let chi = ramanline::chi3(&c.raman, on_resonance, pressure_bar)?;
                    (chi * c.chi3_amplitude).norm_sqr()
                }
            }
        };
        let l = c.fiber.length_m;
        Ok(chi2 * l * l * c.pump.power_w * c.stokes.power_w * c.probe.power_w)
    }

    pub fn efficiency(&self, pressure_bar: f64) -> Result<f64> {
        let db = self.delta_beta(pressure_bar)?;
        Ok(self.prefactor(pressure_bar)? * phase_matching_factor(db, self.config.fiber.length_m))
    }

    /// `|(1/L) ∫ exp(i φ(z)) dz|²` with `φ(z) = ∫₀ᶻ Δβ(p(z')) dz'`.
    pub fn gradient_factor(&self, profile: &PressureProfile) -> Result<f64> {
        profile.validate()?;
        let length = self.config.fiber.length_m;
        if ((profile.fiber_length_m - length) / length).abs() > 1e-12 {
            return Err(Error::config(format!(
                "profile length {} m differs from fiber length {length} m",
                profile.fiber_length_m
            )));
        }
        let tol = Tolerance {
            relative: 1e-9,
            // Bounds the error of |I/L|² near 2e-11 even where the overlap vanishes.
            absolute: 1e-11 * length,
            max_subintervals: 4096,
        };
        // Phase accuracy is absolute: 1e-10 rad is far below the outer tolerance.
        let inner_tol = Tolerance {
            relative: 1e-12,
            absolute: 1e-10,
            max_subintervals: 1024,
        };
        let breaks = profile.breakpoints();
        let mut phase_at_start = 0.0;
        let mut field = Complex64::new(0.0, 0.0);
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mismatch = |z: f64| self.delta_beta(profile.pressure_at(z));
            let phase = |z: f64| -> Result<f64> {
                let part = quadrature::integrate(mismatch, a, z, inner_tol).map_err(|e| diagnose(e, z))?;
                Ok(phase_at_start + part.value)
            };
            let seg = quadrature::integrate_complex(
                |z| phase(z).map(|p| Complex64::from_polar(1.0, p)),
                a,
                b,
                tol,
            )
            .map_err(|e| diagnose(e, a))?;
            field += seg.value;
            phase_at_start = phase(b)?;
        }
        Ok((field / length).norm_sqr())
    }
}

fn diagnose(e: Error, z: f64) -> Error {
    match e {
        Error::Numerical(msg) => Error::Numerical(format!("gradient integral near z = {z} m: {msg}")),
        other => other,
    }
}

/// sin(x)/x with a series expansion near zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `sinc²(Δβ L / 2)`.
pub fn phase_matching_factor(delta_beta: f64, length_m: f64) -> f64 {
    sinc(0.5 * delta_beta * length_m).powi(2)
}

pub fn beta(
    field: &OpticalField,
    geometry: &FiberGeometry,
    gas: &GasState,
    data: &GasDispersionData,
    mode: &ModeSpec,
) -> Result<f64> {
    let model = FiberModel::new(geometry, mode, IndexOptions::default())?;
    let n = model.n_eff(gas, data, field.wavelength_nm())?;
    Ok(2.0 * PI / (field.wavelength_nm() * NM) * n)
}

pub fn delta_beta(config: &ConversionConfig, pressure_bar: f64) -> Result<f64> {
    PhaseMatcher::new(config)?.delta_beta(pressure_bar)
}

pub fn efficiency_relative(config: &ConversionConfig, pressure_bar: f64) -> Result<f64> {
    PhaseMatcher::new(config)?.efficiency(pressure_bar)
}

pub fn gradient_efficiency(config: &ConversionConfig, profile: &PressureProfile) -> Result<f64> {
    PhaseMatcher::new(config)?.gradient_factor(profile)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    Uniform { pressure_bar: f64 },
    Linear { inlet_bar: f64, outlet_bar: f64 },
    /// `(z in m, p in bar)` nodes, linearly interpolated.
    Sampled { points: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureProfile {
    pub kind: ProfileKind,
    pub fiber_length_m: f64,
}

impl PressureProfile {
    pub fn uniform(pressure_bar: f64, fiber_length_m: f64) -> Self {
        Self {
            kind: ProfileKind::Uniform { pressure_bar },
            fiber_length_m,
        }
    }

    pub fn linear(inlet_bar: f64, outlet_bar: f64, fiber_length_m: f64) -> Self {
        Self {
            kind: ProfileKind::Linear {
                inlet_bar,
                outlet_bar,
            },
            fiber_length_m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fiber_length_m > 0.0) {
            return Err(Error::config("profile length must be positive"));
        }
        let nonneg = |p: f64| p >= 0.0 && p.is_finite();
        match &self.kind {
            ProfileKind::Uniform { pressure_bar } if !nonneg(*pressure_bar) => {
                Err(Error::domain("profile pressures must be >= 0"))
            }
            ProfileKind::Linear {
                inlet_bar,
                outlet_bar,
            } if !nonneg(*inlet_bar) || !nonneg(*outlet_bar) => {
                Err(Error::domain("profile pressures must be >= 0"))
            }
            ProfileKind::Sampled { points } => {
                if points.len() < 2 {
                    return Err(Error::config("sampled profile needs at least two nodes"));
                }
                if points.iter().any(|&(_, p)| !nonneg(p)) {
                    return Err(Error::domain("profile pressures must be >= 0"));
                }
                if points[0].0 != 0.0 {
                    return Err(Error::config("sampled profile must start at z = 0"));
                }
                let last = points[points.len() - 1].0;
                if ((last - self.fiber_length_m) / self.fiber_length_m).abs() > 1e-12 {
                    return Err(Error::config("sampled profile must end at the fiber length"));
                }
                if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(Error::config("sampled profile z must be strictly increasing"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn pressure_at(&self, z: f64) -> f64 {
        match &self.kind {
            ProfileKind::Uniform { pressure_bar } => *pressure_bar,
            ProfileKind::Linear {
                inlet_bar,
                outlet_bar,
            } => {
                if inlet_bar == outlet_bar {
                    *inlet_bar
                } else {
                    inlet_bar + (outlet_bar - inlet_bar) * (z / self.fiber_length_m)
                }
            }
            ProfileKind::Sampled { points } => {
                let i = points.partition_point(|&(zi, _)| zi <= z).clamp(1, points.len() - 1);
                let (z0, p0) = points[i - 1];
                let (z1, p1) = points[i];
                p0 + (p1 - p0) * ((z - z0) / (z1 - z0)).clamp(0.0, 1.0)
            }
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            ProfileKind::Sampled { points } => points.iter().map(|&(z, _)| z).collect(),
            _ => vec![0.0, self.fiber_length_m],
        }
    }
}

/// Pressure distribution applied at every sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SweepProfile {
    #[default]
    Uniform,
    /// Linear drop from the grid pressure at the inlet to `outlet_ratio` times it at the outlet.
    Linear { outlet_ratio: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub pressure_bar: Vec<f64>,
    /// Δβ at the grid pressure (NaN where invalid), rad/m.
    pub delta_beta: Vec<f64>,
    /// Peak-normalized efficiency in [0, 1].
    pub efficiency: Vec<f64>,
    /// Efficiency in arbitrary units before normalization.
    pub efficiency_au: Vec<f64>,
    pub valid: Vec<bool>,
    pub normalization: f64,
    pub profile: SweepProfile,
    pub config_hash: String,
    pub timestamp_unix: u64,
    pub invalid_reasons: Vec<(usize, String)>,
}

pub const SWEEP_COLUMNS: [&str; 5] = [
    "pressure_bar",
    "delta_beta_rad_per_m",
    "efficiency",
    "efficiency_au",
    "valid",
];

impl SweepResult {
    pub fn len(&self) -> usize {
        self.pressure_bar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pressure_bar.is_empty()
    }

    /// Index of the highest efficiency; lowest pressure wins ties.
    pub fn global_max(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for i in 0..self.len() {
            if self.valid[i] && best.is_none_or(|b| self.efficiency_au[i] > self.efficiency_au[b]) {
                best = Some(i);
            }
        }
        best
    }

    /// Interior local maxima (strictly above the left neighbour, not below the right).
    pub fn local_maxima(&self) -> Vec<usize> {
        let e = &self.efficiency_au;
        (1..self.len().saturating_sub(1))
            .filter(|&i| {
                self.valid[i - 1]
                    && self.valid[i]
                    && self.valid[i + 1]
                    && e[i] > e[i - 1]
                    && e[i] >= e[i + 1]
            })
            .collect()
    }

    /// Header lines, each starting with `#`.
    pub fn header_text(&self) -> String {
        let profile = match self.profile {
            SweepProfile::Uniform => "uniform".to_string(),
            SweepProfile::Linear { outlet_ratio } => format!("linear outlet_ratio={outlet_ratio}"),
        };
        format!(
            "# hcf-fwm pressure sweep, format 1\n# config_hash = {}\n# timestamp_unix = {}\n\
             # profile = {profile}\n# normalization_au = {:e}\n",
            self.config_hash, self.timestamp_unix, self.normalization
        )
    }

    /// Column header plus one tab-separated row per grid point.
    pub fn data_text(&self) -> String {
        let mut s = SWEEP_COLUMNS.join("\t");
        s.push('\n');
        for i in 0..self.len() {
            s.push_str(&format!(
                "{:.6}\t{:.12e}\t{:.12e}\t{:.12e}\t{}\n",
                self.pressure_bar[i],
                self.delta_beta[i],
                self.efficiency[i],
                self.efficiency_au[i],
                u8::from(self.valid[i])
            ));
        }
        s
    }

    pub fn to_columnar_text(&self) -> String {
        self.header_text() + &self.data_text()
    }
}

pub fn pressure_grid(p_min: f64, p_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(p_min >= 0.0) || !(p_max > p_min) || !p_max.is_finite() {
        return Err(Error::domain(format!(
            "pressure range must satisfy 0 <= p_min < p_max, got [{p_min}, {p_max}]"
        )));
    }
    if steps < 2 {
        return Err(Error::domain("a sweep needs at least 2 steps"));
    }
    let span = p_max - p_min;
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| if i + 1 == steps { p_max } else { p_min + span * (i as f64 / last) })
        .collect())
}

pub fn pressure_sweep(config: &ConversionConfig, p_min: f64, p_max: f64, steps: usize) -> Result<SweepResult> {
    pressure_sweep_with_profile(config, p_min, p_max, steps, SweepProfile::Uniform)
}

pub fn pressure_sweep_with_profile(
    config: &ConversionConfig,
    p_min: f64,
    p_max: f64,
    steps: usize,
    profile: SweepProfile,
) -> Result<SweepResult> {
    let matcher = PhaseMatcher::new(config)?;
    let grid = pressure_grid(p_min, p_max, steps)?;
    if let SweepProfile::Linear { outlet_ratio } = profile {
        if !(outlet_ratio >= 0.0) || !outlet_ratio.is_finite() {
            return Err(Error::domain("outlet ratio must be >= 0"));
        }
    }
    let length = config.fiber.length_m;
    let points: Vec<std::result::Result<(f64, f64), String>> = grid
        .par_iter()
        .map(|&p| {
            let eval = || -> Result<(f64, f64)> {
                let db = matcher.delta_beta(p)?;
                let factor = match profile {
                    SweepProfile::Uniform => phase_matching_factor(db, length),
                    SweepProfile::Linear { outlet_ratio } => matcher
                        .gradient_factor(&PressureProfile::linear(p, p * outlet_ratio, length))?,
                };
                Ok((db, matcher.prefactor(p)? * factor))
            };
            eval().map_err(|e| e.to_string())
        })
        .collect();

    let mut delta_beta = Vec::with_capacity(steps);
    let mut raw = Vec::with_capacity(steps);
    let mut valid = Vec::with_capacity(steps);
    let mut invalid_reasons = Vec::new();
    for (i, pt) in points.into_iter().enumerate() {
        match pt {
            Ok((db, e)) => {
                delta_beta.push(db);
                raw.push(e);
                valid.push(true);
            }
            Err(msg) => {
                delta_beta.push(f64::NAN);
                raw.push(0.0);
                valid.push(false);
                invalid_reasons.push((i, msg));
            }
        }
    }
    let peak = raw.iter().copied().fold(0.0, f64::max);
    let efficiency = if peak > 0.0 {
        raw.iter().map(|e| e / peak).collect()
    } else {
        vec![0.0; raw.len()]
    };
    Ok(SweepResult {
        pressure_bar: grid,
        delta_beta,
        efficiency,
        efficiency_au: raw,
        valid,
        normalization: peak,
        profile,
        config_hash: config.config_hash(),
        timestamp_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        invalid_reasons,
    })
}

/// Settings of the grid-then-golden-section maximizer.
#[derive(Debug, Clone, Copy)]
pub struct MaximizeOptions {
    pub grid_points: usize,
    pub tolerance: f64,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        Self {
            grid_points: 2000,
            tolerance: 0.01,
        }
    }
}

/// Global maximum of `f` on `[lo, hi]`: dense grid, then golden-section
/// refinement around the best grid point. Points where `f` fails are skipped.
/// Ties resolve to the lowest abscissa.
pub fn maximize<F>(f: F, lo: f64, hi: f64, options: MaximizeOptions) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let grid = pressure_grid(lo, hi, options.grid_points.max(3))?;
    let values: Vec<Option<f64>> = grid.par_iter().map(|&x| f(x).ok()).collect();
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        if let Some(v) = v {
            if best.is_none_or(|b| *v > values[b].unwrap()) {
                best = Some(i);
            }
        }
    }
    let best = best.ok_or_else(|| Error::Numerical("no valid point on the optimization grid".into()))?;
    let (grid_x, grid_f) = (grid[best], values[best].unwrap());

    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(grid.len() - 1)];
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let eval = |x: f64| f(x).unwrap_or(f64::NEG_INFINITY);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (eval(c), eval(d));
    while (b - a) > options.tolerance {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = eval(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = eval(x);
    if fx > grid_f {
        Ok((x, fx))
    } else {
        Ok((grid_x, grid_f))
    }
}

/// Pressure of maximum conversion within `[p_min, p_max]` and its efficiency.
pub fn optimize_pressure(config: &ConversionConfig, p_min: f64, p_max: f64) -> Result<(f64, f64)> {
    optimize_pressure_with(config, p_min, p_max, MaximizeOptions::default())
}

pub fn optimize_pressure_with(
    config: &ConversionConfig,
    p_min: f64,
    p_max: f64,
    options: MaximizeOptions,
) -> Result<(f64, f64)> {
    let matcher = PhaseMatcher::new(config)?;
    maximize(|p| matcher.efficiency(p), p_min, p_max, options)
}
