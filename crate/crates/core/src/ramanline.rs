//! Vibrational Raman resonance: complex Lorentzian χ⁽³⁾ with a pressure
//! dependent linewidth (Dicke narrowing plus collisional broadening) and a
//! linear collisional shift.
//!
//! Frequencies: line positions in THz, detunings and widths in MHz.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phasematch::{phase_matching_factor, ConversionConfig, PhaseMatcher};

const BUILTIN_H2_Q11: &str = include_str!("../data/h2_q11_raman.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamanTransition {
    #[serde(default)]
    pub name: String,
    pub shift_frequency_thz: f64,
    /// Dicke-narrowing coefficient A in Γ = A/p + B p, MHz·bar.
    pub diffusion_coefficient_mhz_bar: f64,
    /// Collisional-broadening coefficient B, MHz/bar.
    pub collisional_coefficient_mhz_per_bar: f64,
    pub shift_coefficient_mhz_per_bar: f64,
    pub amplitude: f64,
}

impl RamanTransition {
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "h2-q11" => Self::from_toml_str(BUILTIN_H2_Q11),
            _ => Err(Error::config(format!(
                "unknown Raman transition '{name}' (built-in: h2-q11)"
            ))),
        }
    }

    /// Q1(1) line of H2 with literature width and shift coefficients.
    pub fn hydrogen_q11() -> Self {
        Self::builtin("h2-q11").expect("built-in Raman dataset is valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Tagged {
            format_version: u32,
            kind: String,
            #[serde(flatten)]
            transition: RamanTransition,
        }
        let tagged: Tagged =
            toml::from_str(text).map_err(|e| Error::config(format!("Raman dataset: {e}")))?;
        if tagged.format_version != 1 || tagged.kind != "raman_transition" {
            return Err(Error::config(format!(
                "expected kind = \"raman_transition\" format 1, found \"{}\" format {}",
                tagged.kind, tagged.format_version
            )));
        }
        tagged.transition.validate()?;
        Ok(tagged.transition)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shift_frequency_thz > 0.0) {
            return Err(Error::config("Raman shift frequency must be positive"));
        }
        if !(self.diffusion_coefficient_mhz_bar >= 0.0)
            || !(self.collisional_coefficient_mhz_per_bar >= 0.0)
        {
            return Err(Error::config("Raman linewidth coefficients must be non-negative"));
        }
        if !self.shift_coefficient_mhz_per_bar.is_finite() || !self.amplitude.is_finite() {
            return Err(Error::config("Raman shift and amplitude must be finite"));
        }
        Ok(())
    }

    /// Pressure at which the linewidth is narrowest, `sqrt(A/B)`.
    pub fn narrowest_pressure_bar(&self) -> Option<f64> {
        (self.collisional_coefficient_mhz_per_bar > 0.0).then(|| {
            (self.diffusion_coefficient_mhz_bar / self.collisional_coefficient_mhz_per_bar).sqrt()
        })
    }
}

/// FWHM linewidth Γ(p) = A/p + B·p in MHz.
pub fn linewidth(transition: &RamanTransition, pressure_bar: f64) -> Result<f64> {
    if !(pressure_bar > 0.0) || !pressure_bar.is_finite() {
        return Err(Error::domain(format!(
            "linewidth needs a positive pressure, got {pressure_bar} bar"
        )));
    }
    Ok(transition.diffusion_coefficient_mhz_bar / pressure_bar
        + transition.collisional_coefficient_mhz_per_bar * pressure_bar)
}

/// Collisional shift δ₀(p) of the line centre from its nominal position, MHz.
pub fn collisional_shift_mhz(transition: &RamanTransition, pressure_bar: f64) -> f64 {
    transition.shift_coefficient_mhz_per_bar * pressure_bar
}

/// Line centre ν₀(p) in THz.
pub fn line_center(transition: &RamanTransition, pressure_bar: f64) -> Result<f64> {
    if !(pressure_bar >= 0.0) || !pressure_bar.is_finite() {
        return Err(Error::domain(format!(
            "pressure must be >= 0 bar, got {pressure_bar}"
        )));
    }
    Ok(transition.shift_frequency_thz + collisional_shift_mhz(transition, pressure_bar) * 1e-6)
}

/// χ⁽³⁾(δ) = amplitude·p / (δ − δ₀(p) + iΓ(p)/2), δ in MHz from the nominal line.
pub fn chi3(transition: &RamanTransition, detuning_mhz: f64, pressure_bar: f64) -> Result<Complex64> {
    let gamma = linewidth(transition, pressure_bar)?;
    if gamma <= 0.0 {
        return Err(Error::domain(format!(
            "linewidth vanishes at {pressure_bar} bar; Lorentzian undefined"
        )));
    }
    let denom = Complex64::new(
        detuning_mhz - collisional_shift_mhz(transition, pressure_bar),
        0.5 * gamma,
    );
    Ok(Complex64::new(transition.amplitude * pressure_bar, 0.0) / denom)
}

/// Conversion versus pump–Stokes detuning at fixed pressure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineProfile {
    pub pressure_bar: f64,
    pub detuning_mhz: Vec<f64>,
    /// Peak-normalized conversion.
    pub conversion: Vec<f64>,
    pub center_mhz: f64,
    pub linewidth_mhz: f64,
}

impl LineProfile {
    /// Full width at half maximum from linear interpolation of the sampled
    /// profile; `None` if either half-power crossing lies outside the scan.
    pub fn fwhm_mhz(&self) -> Option<f64> {
        let (x, y) = (&self.detuning_mhz, &self.conversion);
        let peak = (0..y.len()).max_by(|&a, &b| y[a].total_cmp(&y[b]))?;
        let cross = |i: usize, j: usize| x[i] + (0.5 - y[i]) * (x[j] - x[i]) / (y[j] - y[i]);
        let left = (1..=peak).rev().find(|&i| y[i - 1] < 0.5).map(|i| cross(i - 1, i))?;
        let right = (peak..y.len() - 1).find(|&i| y[i + 1] < 0.5).map(|i| cross(i, i + 1))?;
        Some(right - left)
    }
}

/// Evaluates `|χ³(δ)|² L² sinc²(ΔβL/2) P_p P_s P_pr` over `detunings_mhz` and
/// normalizes to the peak. The phase mismatch is taken at `pressure_bar`.
pub fn detuning_scan(
    config: &ConversionConfig,
    pressure_bar: f64,
    detunings_mhz: &[f64],
) -> Result<LineProfile> {
    if detunings_mhz.is_empty() {
        return Err(Error::domain("detuning scan needs at least one point"));
    }
    let matcher = PhaseMatcher::new(config)?;
    let t = &config.raman;
    let factor = phase_matching_factor(matcher.delta_beta(pressure_bar)?, config.fiber.length_m);
    let l = config.fiber.length_m;
    let powers = config.pump().power_w * config.stokes().power_w * config.probe().power_w;
    let raw = detunings_mhz
        .iter()
        .map(|&d| {
            let chi = chi3(t, d, pressure_bar)? * config.chi3_amplitude;
            Ok(chi.norm_sqr() * l * l * factor * powers)
        })
        .collect::<Result<Vec<f64>>>()?;
    let peak = raw.iter().copied().fold(0.0, f64::max);
    let conversion = if peak > 0.0 {
        raw.iter().map(|v| v / peak).collect()
    } else {
        vec![0.0; raw.len()]
    };
    Ok(LineProfile {
        pressure_bar,
        detuning_mhz: detunings_mhz.to_vec(),
        conversion,
        center_mhz: collisional_shift_mhz(t, pressure_bar),
        linewidth_mhz: linewidth(t, pressure_bar)?,
    })
}
