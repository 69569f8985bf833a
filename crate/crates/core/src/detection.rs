//! Detection chain, dead-time correction, the spontaneous Raman noise floor,
//! count-file ingestion and the single-scale fit of the conversion model to
//! measured pressure sweeps.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::photon_energy_j;
use crate::error::{Error, Result};
use crate::phasematch::{ConversionConfig, PhaseMatcher};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectionChain {
    pub apd_quantum_efficiency: f64,
    pub apd_dead_time_s: f64,
    pub bandpass_transmission: f64,
    pub edge_filter_transmission: f64,
    pub fiber_coupling: f64,
}

impl Default for DetectionChain {
    fn default() -> Self {
        Self {
            apd_quantum_efficiency: 0.125,
            apd_dead_time_s: 1e-6,
            bandpass_transmission: 0.93,
            edge_filter_transmission: 0.977,
            fiber_coupling: 0.30,
        }
    }
}

impl DetectionChain {
    pub fn validate(&self) -> Result<()> {
        for (name, f) in self.named_factors() {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::config(format!("{name} must lie in (0, 1], got {f}")));
            }
        }
        if !(self.apd_dead_time_s >= 0.0) || !self.apd_dead_time_s.is_finite() {
            return Err(Error::config("dead time must be >= 0"));
        }
        Ok(())
    }

    fn named_factors(&self) -> [(&'static str, f64); 4] {
        [
            ("apd_quantum_efficiency", self.apd_quantum_efficiency),
            ("bandpass_transmission", self.bandpass_transmission),
            ("edge_filter_transmission", self.edge_filter_transmission),
            ("fiber_coupling", self.fiber_coupling),
        ]
    }

    pub fn factors(&self) -> [f64; 4] {
        self.named_factors().map(|(_, f)| f)
    }
}

/// Product of all transmission and detection factors.
pub fn chain_efficiency(chain: &DetectionChain) -> f64 {
    chain.factors().iter().product()
}

/// Non-paralyzable dead-time correction `r = m / (1 − m τ)`.
pub fn dead_time_correct(measured_rate_cps: f64, dead_time_s: f64) -> Result<f64> {
    if !(measured_rate_cps >= 0.0) || !measured_rate_cps.is_finite() {
        return Err(Error::domain(format!(
            "measured rate must be >= 0, got {measured_rate_cps}"
        )));
    }
    if !(dead_time_s >= 0.0) {
        return Err(Error::domain("dead time must be >= 0"));
    }
    let live = 1.0 - measured_rate_cps * dead_time_s;
    if live <= 0.0 {
        return Err(Error::Saturation {
            rate_cps: measured_rate_cps,
            dead_time_s,
        });
    }
    Ok(measured_rate_cps / live)
}

/// Rate registered by a non-paralyzable detector for a true rate `r`.
pub fn observe(true_rate_cps: f64, dead_time_s: f64) -> f64 {
    true_rate_cps / (1.0 + true_rate_cps * dead_time_s)
}

/// Internal spontaneous conversion efficiency per (cm·bar) fixed by the
/// 1.3e-12 value at 5 bar in 27 cm.
pub const ANCHOR_SPONTANEOUS_COEFFICIENT: f64 = 1.3e-12 / (5.0 * 27.0);

/// The per-unit coefficient as quoted alongside that anchor. It does not
/// reproduce the anchor (7e-15·5·27 = 9.45e-13).
pub const QUOTED_SPONTANEOUS_COEFFICIENT: f64 = 7e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Internal efficiency per (cm·bar).
    pub spontaneous_coefficient: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            spontaneous_coefficient: ANCHOR_SPONTANEOUS_COEFFICIENT,
        }
    }
}

impl NoiseModel {
    pub fn quoted() -> Self {
        Self {
            spontaneous_coefficient: QUOTED_SPONTANEOUS_COEFFICIENT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.spontaneous_coefficient > 0.0) || !self.spontaneous_coefficient.is_finite() {
            return Err(Error::config("spontaneous coefficient must be positive"));
        }
        Ok(())
    }
}

pub fn spontaneous_efficiency(noise: &NoiseModel, pressure_bar: f64, length_cm: f64) -> Result<f64> {
    if !(pressure_bar >= 0.0) || !pressure_bar.is_finite() {
        return Err(Error::domain("pressure must be >= 0"));
    }
    if !(length_cm > 0.0) || !length_cm.is_finite() {
        return Err(Error::domain("length must be positive"));
    }
    Ok(noise.spontaneous_coefficient * pressure_bar * length_cm)
}

/// Coherent internal efficiency over the spontaneous floor at the same pressure and length.
pub fn coherent_to_spontaneous_ratio(
    coherent_efficiency: f64,
    noise: &NoiseModel,
    pressure_bar: f64,
    length_cm: f64,
) -> Result<f64> {
    let floor = spontaneous_efficiency(noise, pressure_bar, length_cm)?;
    if floor == 0.0 {
        return Err(Error::domain("spontaneous floor vanishes at zero pressure"));
    }
    Ok(coherent_efficiency / floor)
}

/// Internal efficiency normalized by pump and Stokes powers, in %/W².
pub fn relative_efficiency_percent_per_w2(internal_efficiency: f64, pump_w: f64, stokes_w: f64) -> Result<f64> {
    if !(pump_w > 0.0) || !(stokes_w > 0.0) {
        return Err(Error::domain("pump and stokes powers must be positive"));
    }
    Ok(internal_efficiency / (pump_w * stokes_w) * 100.0)
}

/// Photons per second carried by `power_w` at `wavelength_nm`.
pub fn photon_rate(power_w: f64, wavelength_nm: f64) -> f64 {
    power_w / photon_energy_j(wavelength_nm)
}

/// `absolute_scale · η_rel(p) · η_chain · Ṅ_probe`, in counts/s.
pub fn expected_signal_rate(
    config: &ConversionConfig,
    pressure_bar: f64,
    chain: &DetectionChain,
    absolute_scale: f64,
) -> Result<f64> {
    let matcher = PhaseMatcher::new(config)?;
    expected_rate_with(&matcher, pressure_bar, chain, absolute_scale)
}

fn expected_rate_with(
    matcher: &PhaseMatcher<'_>,
    pressure_bar: f64,
    chain: &DetectionChain,
    absolute_scale: f64,
) -> Result<f64> {
    let probe = matcher.config().probe();
    Ok(absolute_scale
        * matcher.efficiency(pressure_bar)?
        * chain_efficiency(chain)
        * photon_rate(probe.power_w, probe.wavelength_nm()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub pressure_bar: f64,
    pub rate_cps: f64,
    pub exposure_s: f64,
    pub detector: String,
}

pub const COUNT_COLUMNS: [&str; 4] = ["pressure_bar", "rate_cps", "exposure_s", "detector"];

/// Parsed count file plus non-fatal warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct CountFile {
    pub records: Vec<CountRecord>,
    pub warnings: Vec<String>,
}

pub fn load_counts(path: &Path) -> Result<CountFile> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    counts_from_reader(file, path)
}

pub fn counts_from_reader<R: std::io::Read>(reader: R, path: &Path) -> Result<CountFile> {
    let rows = crate::io::read_table(reader, path, &COUNT_COLUMNS)?;
    let mut records = Vec::with_capacity(rows.len());
    for row in &rows {
        let r = CountRecord {
            pressure_bar: row.number(0)?,
            rate_cps: row.number(1)?,
            exposure_s: row.number(2)?,
            detector: row.text(3).to_string(),
        };
        if !(r.pressure_bar >= 0.0) {
            return Err(row.error("pressure_bar must be >= 0"));
        }
        if !(r.rate_cps >= 0.0) {
            return Err(row.error("rate_cps must be >= 0"));
        }
        if !(r.exposure_s > 0.0) {
            return Err(row.error("exposure_s must be positive"));
        }
        records.push(r);
    }
    let mut warnings = Vec::new();
    if records.is_empty() {
        warnings.push(format!("{}: no count records", path.display()));
    }
    Ok(CountFile { records, warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub p_max_fit_bar: f64,
    /// Constant background subtracted before dead-time correction, counts/s.
    pub background_cps: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            p_max_fit_bar: 20.0,
            background_cps: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitPoint {
    pub pressure_bar: f64,
    pub detector: String,
    pub corrected_rate_cps: f64,
    /// Model rate at unit scale.
    pub unit_model_cps: f64,
    pub fitted_model_cps: f64,
    pub residual_cps: f64,
    pub in_fit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Goodness {
    pub points: usize,
    pub sum_squared_residuals: f64,
    pub rms_residual_cps: f64,
    /// Σ residual / Σ fitted model; negative when data fall short of the model.
    pub relative_shortfall: f64,
}

impl Goodness {
    fn over<'a>(pts: impl Iterator<Item = &'a FitPoint>) -> Self {
        let (mut n, mut ss, mut res, mut model) = (0usize, 0.0, 0.0, 0.0);
        for p in pts {
            n += 1;
            ss += p.residual_cps * p.residual_cps;
            res += p.residual_cps;
            model += p.fitted_model_cps;
        }
        Self {
            points: n,
            sum_squared_residuals: ss,
            rms_residual_cps: if n > 0 { (ss / n as f64).sqrt() } else { 0.0 },
            relative_shortfall: if model != 0.0 { res / model } else { 0.0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub scale: f64,
    pub p_max_fit_bar: f64,
    pub background_cps: f64,
    pub points: Vec<FitPoint>,
    pub restricted: Goodness,
    pub full_range: Goodness,
}

/// Least-squares scale `k` minimizing Σ (y − k m)², i.e. `Σ y m / Σ m²`.
pub fn least_squares_scale(data: &[f64], model: &[f64]) -> Result<f64> {
    if data.len() != model.len() {
        return Err(Error::domain("data and model lengths differ"));
    }
    let mm: f64 = model.iter().map(|m| m * m).sum();
    if !(mm > 0.0) {
        return Err(Error::Numerical("model vanishes on every fitted point".into()));
    }
    let ym: f64 = data.iter().zip(model).map(|(y, m)| y * m).sum();
    Ok(ym / mm)
}

/// Fits one multiplicative scale between corrected count rates and the
/// expected signal rate using records at or below `p_max_fit_bar`. Residuals
/// are reported for every record.
pub fn fit_model_scale(
    records: &[CountRecord],
    config: &ConversionConfig,
    chain: &DetectionChain,
    options: FitOptions,
) -> Result<FitReport> {
    chain.validate()?;
    let matcher = PhaseMatcher::new(config)?;
    let mut points = Vec::with_capacity(records.len());
    for r in records {
        let net = (r.rate_cps - options.background_cps).max(0.0);
        points.push(FitPoint {
            pressure_bar: r.pressure_bar,
            detector: r.detector.clone(),
            corrected_rate_cps: dead_time_correct(net, chain.apd_dead_time_s)?,
            unit_model_cps: expected_rate_with(&matcher, r.pressure_bar, chain, 1.0)?,
            fitted_model_cps: 0.0,
            residual_cps: 0.0,
            in_fit: r.pressure_bar <= options.p_max_fit_bar,
        });
    }
    let (y, m): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| p.in_fit)
        .map(|p| (p.corrected_rate_cps, p.unit_model_cps))
        .unzip();
    if y.len() < 2 {
        return Err(Error::domain(format!(
            "need at least 2 records at or below {} bar, found {}",
            options.p_max_fit_bar,
            y.len()
        )));
    }
    let scale = least_squares_scale(&y, &m)?;
    for p in &mut points {
        p.fitted_model_cps = scale * p.unit_model_cps;
        p.residual_cps = p.corrected_rate_cps - p.fitted_model_cps;
    }
    Ok(FitReport {
        scale,
        p_max_fit_bar: options.p_max_fit_bar,
        background_cps: options.background_cps,
        restricted: Goodness::over(points.iter().filter(|p| p.in_fit)),
        full_range: Goodness::over(points.iter()),
        points,
    })
}
