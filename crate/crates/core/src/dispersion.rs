//! Refractive-index models for the filling gas, the silica capillary wall and
//! the guided core mode of a single-ring anti-resonant fiber.
//!
//! The core mode uses the capillary (Marcatili) effective index of a hollow
//! dielectric tube,
//!
//! ```text
//! n_eff = n_gas * sqrt(1 - (u * λ / (2π R n_gas))²)
//! ```
//!
//! optionally corrected by the wall-resonance term of the anti-resonant tube
//! model, which diverges at the capillary resonances
//! `λ_m = (2t/m) * sqrt(n_glass(λ_m)² - 1)`.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::{BESSEL_J0_FIRST_ZERO, NM, UM};
use crate::error::{Error, Result};

/// Lower and upper bounds (exclusive) of the silica Sellmeier model, nm.
pub const GLASS_RANGE_NM: (f64, f64) = (200.0, 4000.0);

const SILICA_B: [f64; 3] = [0.696_166_3, 0.407_942_6, 0.897_479_4];
const SILICA_C_UM: [f64; 3] = [0.068_404_3, 0.116_241_4, 9.896_161];

const RESONANCE_TOLERANCE_NM: f64 = 0.1;
const RESONANCE_MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberGeometry {
    pub core_radius_um: f64,
    pub wall_thickness_nm: f64,
    pub capillary_count: u32,
    pub length_m: f64,
}

impl FiberGeometry {
    pub fn new(
        core_radius_um: f64,
        wall_thickness_nm: f64,
        capillary_count: u32,
        length_m: f64,
    ) -> Result<Self> {
        let g = Self {
            core_radius_um,
            wall_thickness_nm,
            capillary_count,
            length_m,
        };
        g.validate()?;
        Ok(g)
    }

    /// Single-ring fiber with five capillaries, 26.4 µm core diameter,
    /// 360 nm walls and 27 cm length.
    pub fn reference() -> Self {
        Self {
            core_radius_um: 13.2,
            wall_thickness_nm: 360.0,
            capillary_count: 5,
            length_m: 0.27,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.core_radius_um)
            || !positive(self.wall_thickness_nm)
            || !positive(self.length_m)
        {
            return Err(Error::config(format!(
                "fiber lengths must be finite and positive: {self:?}"
            )));
        }
        if self.capillary_count < 3 {
            return Err(Error::config(format!(
                "at least 3 capillaries required, got {}",
                self.capillary_count
            )));
        }
        // thin-wall regime: t < R/10
        if self.wall_thickness_nm * NM >= self.core_radius_um * UM / 10.0 {
            return Err(Error::config(format!(
                "wall thickness {} nm is not small against core radius {} um",
                self.wall_thickness_nm, self.core_radius_um
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GasSpecies {
    Hydrogen,
    Other(String),
}

impl GasSpecies {
    pub fn as_str(&self) -> &str {
        match self {
            GasSpecies::Hydrogen => "hydrogen",
            GasSpecies::Other(s) => s,
        }
    }
}

impl fmt::Display for GasSpecies {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<&str> for GasSpecies {
    fn from(s: &str) -> Self {
        match s.to_ascii_lowercase().as_str() {
            "hydrogen" | "h2" => GasSpecies::Hydrogen,
            other => GasSpecies::Other(other.to_string()),
        }
    }
}

impl Serialize for GasSpecies {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for GasSpecies {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(GasSpecies::from(s.as_str()))
    }
}

/// Equation of state used to turn pressure into number density.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Compressibility {
    #[default]
    Ideal,
    /// `Z(p) = 1 + c1 p + c2 p² + ...` with p in bar, at the gas temperature.
    Virial { coefficients: Vec<f64> },
}

impl Compressibility {
    pub fn factor(&self, pressure_bar: f64) -> f64 {
        match self {
            Compressibility::Ideal => 1.0,
            Compressibility::Virial { coefficients } => {
                let mut z = 1.0;
                let mut pk = 1.0;
                for c in coefficients {
                    pk *= pressure_bar;
                    z += c * pk;
                }
                z
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasState {
    pub species: GasSpecies,
    pub pressure_bar: f64,
    pub temperature_k: f64,
    #[serde(default)]
    pub compressibility: Compressibility,
}

impl GasState {
    pub fn hydrogen(pressure_bar: f64, temperature_k: f64) -> Self {
        Self {
            species: GasSpecies::Hydrogen,
            pressure_bar,
            temperature_k,
            compressibility: Compressibility::Ideal,
        }
    }

    pub fn with_pressure(&self, pressure_bar: f64) -> Self {
        Self {
            pressure_bar,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pressure_bar >= 0.0) || !self.pressure_bar.is_finite() {
            return Err(Error::domain(format!(
                "gas pressure must be >= 0 bar, got {}",
                self.pressure_bar
            )));
        }
        if !(self.temperature_k > 0.0) || !self.temperature_k.is_finite() {
            return Err(Error::domain(format!(
                "gas temperature must be > 0 K, got {}",
                self.temperature_k
            )));
        }
        if self.compressibility.factor(self.pressure_bar) <= 0.0 {
            return Err(Error::domain(format!(
                "compressibility factor is not positive at {} bar",
                self.pressure_bar
            )));
        }
        Ok(())
    }

    /// Number density relative to the dataset's reference state.
    pub fn density_ratio(&self, data: &GasDispersionData) -> f64 {
        let ideal = (self.pressure_bar / data.reference_pressure_bar)
            * (data.reference_temperature_k / self.temperature_k);
        match self.compressibility {
            Compressibility::Ideal => ideal,
            ref z => {
                ideal * z.factor(data.reference_pressure_bar) / z.factor(self.pressure_bar)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SellmeierTerm {
    /// Strength, dimensionless.
    pub b: f64,
    /// Pole position in µm⁻².
    pub c: f64,
}

/// Named refractivity dataset `(n-1) = Σ b/(c - σ²)` at a reference density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasDispersionData {
    pub format_version: u32,
    pub name: String,
    pub species: GasSpecies,
    #[serde(default)]
    pub source: String,
    pub reference_pressure_bar: f64,
    pub reference_temperature_k: f64,
    pub valid_min_nm: f64,
    pub valid_max_nm: f64,
    pub terms: Vec<SellmeierTerm>,
}

const BUILTIN_HYDROGEN: &str = include_str!("../data/h2_peck_huang_1977.toml");

/// Range that every dispersion dataset must cover.
pub const REQUIRED_DATASET_RANGE_NM: (f64, f64) = (400.0, 2000.0);

impl GasDispersionData {
    pub const FORMAT_VERSION: u32 = 1;

    /// Names of the datasets compiled into the crate.
    pub fn builtin_names() -> &'static [&'static str] {
        &["h2-peck-huang-1977"]
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "h2-peck-huang-1977" => Self::from_toml_str(BUILTIN_HYDROGEN),
            _ => Err(Error::config(format!(
                "unknown dispersion dataset '{name}' (built-in: {})",
                Self::builtin_names().join(", ")
            ))),
        }
    }

    pub fn hydrogen() -> Self {
        Self::builtin("h2-peck-huang-1977").expect("built-in hydrogen dataset is valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Tagged {
            kind: String,
            #[serde(flatten)]
            data: GasDispersionData,
        }
        let tagged: Tagged = toml::from_str(text)
            .map_err(|e| Error::config(format!("dispersion dataset: {e}")))?;
        if tagged.kind != "gas_dispersion" {
            return Err(Error::config(format!(
                "expected kind = \"gas_dispersion\", found \"{}\"",
                tagged.kind
            )));
        }
        tagged.data.validate()?;
        Ok(tagged.data)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
            .map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != Self::FORMAT_VERSION {
            return Err(Error::config(format!(
                "dataset '{}' has format_version {}, expected {}",
                self.name,
                self.format_version,
                Self::FORMAT_VERSION
            )));
        }
        if self.name.trim().is_empty() {
            return Err(Error::config("dataset name must not be empty"));
        }
        if !(self.reference_pressure_bar > 0.0) || !(self.reference_temperature_k > 0.0) {
            return Err(Error::config(format!(
                "dataset '{}': reference conditions must be positive",
                self.name
            )));
        }
        if self.terms.is_empty() {
            return Err(Error::config(format!("dataset '{}' has no terms", self.name)));
        }
        let (lo, hi) = REQUIRED_DATASET_RANGE_NM;
        if self.valid_min_nm > lo || self.valid_max_nm < hi {
            return Err(Error::config(format!(
                "dataset '{}' covers {}-{} nm, must cover {lo}-{hi} nm",
                self.name, self.valid_min_nm, self.valid_max_nm
            )));
        }
        // Poles must lie outside the valid range and (n-1) must stay positive.
        let sigma2_max = (1e3 / self.valid_min_nm).powi(2);
        for t in &self.terms {
            if t.c <= sigma2_max {
                return Err(Error::config(format!(
                    "dataset '{}': pole c = {} µm⁻² lies inside the valid range",
                    self.name, t.c
                )));
            }
        }
        let steps = 64;
        for i in 0..=steps {
            let wl = self.valid_min_nm
                + (self.valid_max_nm - self.valid_min_nm) * i as f64 / steps as f64;
            if self.reference_refractivity(wl) <= 0.0 {
                return Err(Error::config(format!(
                    "dataset '{}': refractivity not positive at {wl} nm",
                    self.name
                )));
            }
        }
        Ok(())
    }

    /// `(n-1)` at the reference density, without range checks.
    fn reference_refractivity(&self, wavelength_nm: f64) -> f64 {
        let sigma2 = (1e3 / wavelength_nm).powi(2);
        self.terms.iter().map(|t| t.b / (t.c - sigma2)).sum()
    }

    pub fn refractivity_at_reference(&self, wavelength_nm: f64) -> Result<f64> {
        if !(wavelength_nm >= self.valid_min_nm && wavelength_nm <= self.valid_max_nm) {
            return Err(Error::domain(format!(
                "wavelength {wavelength_nm} nm outside dataset '{}' range {}-{} nm",
                self.name, self.valid_min_nm, self.valid_max_nm
            )));
        }
        Ok(self.reference_refractivity(wavelength_nm))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ModeLabel {
    #[default]
    HE11,
    HE12,
    TE01,
    TM01,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub label: ModeLabel,
    /// Bessel root `u` of the mode (2.405 for HE11).
    pub bessel_root: f64,
}

impl Default for ModeSpec {
    fn default() -> Self {
        Self::he11()
    }
}

impl ModeSpec {
    pub fn he11() -> Self {
        Self {
            label: ModeLabel::HE11,
            bessel_root: BESSEL_J0_FIRST_ZERO,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bessel_root > 0.0) {
            return Err(Error::config(format!(
                "mode {:?}: bessel root must be positive",
                self.label
            )));
        }
        Ok(())
    }
}

/// Switches for the effective-index model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IndexOptions {
    /// Add the anti-resonant wall correction to the capillary base term.
    pub wall_correction: bool,
    /// Half-width of the forbidden band around each resonance, nm.
    pub exclusion_band_nm: f64,
}

impl Default for IndexOptions {
    fn default() -> Self {
        Self {
            wall_correction: false,
            exclusion_band_nm: 5.0,
        }
    }
}

/// Refractive index of fused silica (three-term Sellmeier, Malitson 1965).
pub fn n_glass(wavelength_nm: f64) -> Result<f64> {
    let (lo, hi) = GLASS_RANGE_NM;
    if !(wavelength_nm > lo && wavelength_nm < hi) {
        return Err(Error::domain(format!(
            "silica index defined for {lo} nm < λ < {hi} nm, got {wavelength_nm} nm"
        )));
    }
    let l2 = (wavelength_nm * 1e-3).powi(2);
    let sum: f64 = SILICA_B
        .iter()
        .zip(SILICA_C_UM.iter())
        .map(|(b, c)| b * l2 / (l2 - c * c))
        .sum();
    Ok((1.0 + sum).sqrt())
}

/// `(n-1)` of the gas at its actual density.
pub fn gas_refractivity(gas: &GasState, data: &GasDispersionData, wavelength_nm: f64) -> Result<f64> {
    gas.validate()?;
    if gas.species != data.species {
        return Err(Error::config(format!(
            "no dispersion data for species '{}' in dataset '{}' ({})",
            gas.species, data.name, data.species
        )));
    }
    let reference = data.refractivity_at_reference(wavelength_nm)?;
    Ok(reference * gas.density_ratio(data))
}

pub fn n_gas(gas: &GasState, data: &GasDispersionData, wavelength_nm: f64) -> Result<f64> {
    Ok(1.0 + gas_refractivity(gas, data, wavelength_nm)?)
}

/// A solved capillary resonance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resonance {
    pub order: u32,
    pub wavelength_nm: f64,
}

fn solve_resonance(wall_thickness_nm: f64, order: u32) -> Result<f64> {
    let scale = 2.0 * wall_thickness_nm / order as f64;
    let mut wl = scale * (1.45f64 * 1.45 - 1.0).sqrt();
    for _ in 0..RESONANCE_MAX_ITERATIONS {
        let n = n_glass(wl)?;
        let next = scale * (n * n - 1.0).sqrt();
        if (next - wl).abs() < RESONANCE_TOLERANCE_NM {
            return Ok(next);
        }
        wl = next;
    }
    Err(Error::Numerical(format!(
        "resonance order {order} did not converge in {RESONANCE_MAX_ITERATIONS} iterations"
    )))
}

/// Capillary resonance wavelengths for orders `1..=max_order`, in nm.
pub fn resonance_wavelengths(geometry: &FiberGeometry, max_order: u32) -> Result<Vec<f64>> {
    geometry.validate()?;
    if max_order < 1 {
        return Err(Error::domain("max_order must be at least 1"));
    }
    (1..=max_order)
        .map(|m| solve_resonance(geometry.wall_thickness_nm, m))
        .collect()
}

/// Every resonance whose wavelength lies in the silica model's range.
pub fn resonances_in_range(geometry: &FiberGeometry) -> Result<Vec<Resonance>> {
    geometry.validate()?;
    let mut out = Vec::new();
    for order in 1.. {
        match solve_resonance(geometry.wall_thickness_nm, order) {
            Ok(wavelength_nm) => out.push(Resonance {
                order,
                wavelength_nm,
            }),
            Err(Error::Domain(_)) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Precomputed fiber model: geometry, mode and the resonance table.
#[derive(Debug, Clone)]
pub struct FiberModel {
    geometry: FiberGeometry,
    mode: ModeSpec,
    options: IndexOptions,
    resonances: Vec<Resonance>,
}

impl FiberModel {
    pub fn new(geometry: &FiberGeometry, mode: &ModeSpec, options: IndexOptions) -> Result<Self> {
        geometry.validate()?;
        mode.validate()?;
        if !(options.exclusion_band_nm >= 0.0) {
            return Err(Error::config("exclusion band must be non-negative"));
        }
        Ok(Self {
            geometry: geometry.clone(),
            mode: *mode,
            options,
            resonances: resonances_in_range(geometry)?,
        })
    }

    pub fn geometry(&self) -> &FiberGeometry {
        &self.geometry
    }

    pub fn resonances(&self) -> &[Resonance] {
        &self.resonances
    }

    pub fn nearest_resonance(&self, wavelength_nm: f64) -> Option<Resonance> {
        self.resonances.iter().copied().min_by(|a, b| {
            (a.wavelength_nm - wavelength_nm)
                .abs()
                .total_cmp(&(b.wavelength_nm - wavelength_nm).abs())
        })
    }

    /// Fails if the wavelength is inside the exclusion band of a resonance.
    pub fn check_off_resonance(&self, wavelength_nm: f64) -> Result<()> {
        if let Some(r) = self.nearest_resonance(wavelength_nm) {
            if (r.wavelength_nm - wavelength_nm).abs() <= self.options.exclusion_band_nm {
                return Err(Error::ResonanceProximity {
                    wavelength_nm,
                    resonance_nm: r.wavelength_nm,
                    order: r.order,
                    band_nm: self.options.exclusion_band_nm,
                });
            }
        }
        Ok(())
    }

    /// Effective index of the core mode for a core filled with index `n_core`.
    pub fn n_eff_with_core_index(&self, n_core: f64, wavelength_nm: f64) -> Result<f64> {
        self.check_off_resonance(wavelength_nm)?;
        let radius = self.geometry.core_radius_um * UM;
        let wl = wavelength_nm * NM;
        let u = self.mode.bessel_root;
        let x = u * wl / (2.0 * PI * radius * n_core);
        let arg = 1.0 - x * x;
        if arg <= 0.0 {
            return Err(Error::Cutoff {
                wavelength_nm,
                core_radius_um: self.geometry.core_radius_um,
            });
        }
        let mut n = n_core * arg.sqrt();
        if self.options.wall_correction {
            n += n_core * self.wall_term(n_core, wavelength_nm)?;
            if n >= n_core {
                return Err(Error::domain(format!(
                    "wall correction pushes n_eff above the core index at {wavelength_nm} nm"
                )));
            }
        }
        Ok(n)
    }

    /// Relative wall-resonance correction `-(u²/(k n R)³) cot φ (ε+1) / (2 sqrt(ε-1))`.
    fn wall_term(&self, n_core: f64, wavelength_nm: f64) -> Result<f64> {
        let k = 2.0 * PI / (wavelength_nm * NM);
        let radius = self.geometry.core_radius_um * UM;
        let ns = n_glass(wavelength_nm)?;
        let eps = (ns / n_core).powi(2);
        let phi = k * self.geometry.wall_thickness_nm * NM * (ns * ns - n_core * n_core).sqrt();
        let knr = k * n_core * radius;
        let u2 = self.mode.bessel_root.powi(2);
        Ok(-u2 / knr.powi(3) * (eps + 1.0) / (2.0 * (eps - 1.0).sqrt()) / phi.tan())
    }

    pub fn n_eff(&self, gas: &GasState, data: &GasDispersionData, wavelength_nm: f64) -> Result<f64> {
        let core = n_gas(gas, data, wavelength_nm)?;
        self.n_eff_with_core_index(core, wavelength_nm)
    }

    /// Leakage loss of an evacuated fiber in dB/m. Relative surrogate only.
    pub fn leakage_loss_db_per_m(&self, wavelength_nm: f64) -> Result<f64> {
        self.check_off_resonance(wavelength_nm)?;
        let k = 2.0 * PI / (wavelength_nm * NM);
        let radius = self.geometry.core_radius_um * UM;
        let ns = n_glass(wavelength_nm)?;
        let eps = ns * ns;
        let phi = k * self.geometry.wall_thickness_nm * NM * (eps - 1.0).sqrt();
        let u2 = self.mode.bessel_root.powi(2);
        let enhancement = 1.0 / phi.sin().powi(2);
        let im_n = u2 / (k * radius).powi(3) * enhancement * (eps + 1.0) / (2.0 * (eps - 1.0));
        let alpha_np = 2.0 * k * im_n;
        Ok(10.0 * std::f64::consts::LOG10_E * alpha_np)
    }
}

pub fn n_eff(
    geometry: &FiberGeometry,
    gas: &GasState,
    data: &GasDispersionData,
    mode: &ModeSpec,
    wavelength_nm: f64,
) -> Result<f64> {
    FiberModel::new(geometry, mode, IndexOptions::default())?.n_eff(gas, data, wavelength_nm)
}

pub fn leakage_loss_estimate(geometry: &FiberGeometry, mode: &ModeSpec, wavelength_nm: f64) -> Result<f64> {
    FiberModel::new(geometry, mode, IndexOptions::default())?.leakage_loss_db_per_m(wavelength_nm)
}
