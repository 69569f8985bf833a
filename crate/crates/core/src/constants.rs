//! Physical constants and unit conversions used throughout the crate.
//!
//! Values are the exact SI defining constants (2019 redefinition) unless noted.

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Speed of light expressed in nm·THz, convenient for λ ↔ ν conversions.
pub const SPEED_OF_LIGHT_NM_THZ: f64 = 299_792.458;

/// Planck constant, J·s (exact).
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Standard atmosphere in bar (exact).
pub const STANDARD_ATMOSPHERE_BAR: f64 = 1.013_25;

/// 0 °C in kelvin (exact).
pub const ZERO_CELSIUS_K: f64 = 273.15;

/// Default gas temperature for a room-temperature experiment, K.
pub const ROOM_TEMPERATURE_K: f64 = 293.15;

/// First zero of the Bessel function J0, the HE11 mode parameter.
pub const BESSEL_J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

pub const NM: f64 = 1e-9;
pub const UM: f64 = 1e-6;

/// Frequency in THz for a vacuum wavelength in nm.
pub fn thz_from_nm(wavelength_nm: f64) -> f64 {
    SPEED_OF_LIGHT_NM_THZ / wavelength_nm
}

/// Vacuum wavelength in nm for a frequency in THz.
pub fn nm_from_thz(frequency_thz: f64) -> f64 {
    SPEED_OF_LIGHT_NM_THZ / frequency_thz
}

/// Photon energy in joules at the given vacuum wavelength.
pub fn photon_energy_j(wavelength_nm: f64) -> f64 {
    PLANCK * SPEED_OF_LIGHT / (wavelength_nm * NM)
}
