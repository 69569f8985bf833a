//! TOML run configuration shared by every CLI subcommand.
//!
//! ```toml
//! [fiber]
//! core_radius_um = 13.2
//! wall_thickness_nm = 360.0
//! capillary_count = 5
//! length_m = 0.27
//!
//! [gas]
//! species = "hydrogen"
//! pressure_bar = 12.0
//! temperature_k = 293.15
//! dispersion = "h2-peck-huang-1977"   # built-in name or path to a dataset file
//!
//! [fields]
//! pump = { wavelength_nm = 938.0, power_w = 0.05 }
//! stokes = { wavelength_nm = 1538.0, power_w = 0.05 }
//! probe = { wavelength_nm = 863.0, power_w = 0.001, polarization = "D" }
//!
//! [raman]
//! transition = "h2-q11"
//! ```
//!
//! Omitted sections take the reference values. The signal field is never
//! configured; it follows from energy conservation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::detection::{DetectionChain, NoiseModel};
use crate::dispersion::{Compressibility, FiberGeometry, GasDispersionData, GasSpecies, GasState, IndexOptions};
use crate::error::{Error, Result};
use crate::phasematch::{hash_json, Chi3Model, ConversionConfig, FieldRole, IndexModel, OpticalField};
use crate::polarization::JonesVector;
use crate::ramanline::RamanTransition;

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "HCF_FWM_OUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GasSection {
    pub species: GasSpecies,
    pub pressure_bar: f64,
    pub temperature_k: f64,
    #[serde(default)]
    pub compressibility: Compressibility,
    pub dispersion: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub wavelength_nm: f64,
    pub power_w: f64,
    #[serde(default = "default_polarization")]
    pub polarization: String,
}

fn default_polarization() -> String {
    "H".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldsSection {
    pub pump: FieldSpec,
    pub stokes: FieldSpec,
    pub probe: FieldSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RamanSection {
    pub transition: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub chi3: Chi3Model,
    pub chi3_amplitude: f64,
    pub wall_correction: bool,
    pub exclusion_band_nm: f64,
    pub beat_window_ghz: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        let idx = IndexOptions::default();
        Self {
            chi3: Chi3Model::Constant,
            chi3_amplitude: 1.0,
            wall_correction: idx.wall_correction,
            exclusion_band_nm: idx.exclusion_band_nm,
            beat_window_ghz: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub svg: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("hcf-fwm-out"),
            svg: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub fiber: FiberGeometry,
    pub gas: GasSection,
    pub fields: FieldsSection,
    pub raman: RamanSection,
    pub model: ModelSection,
    pub detection: DetectionChain,
    pub noise: NoiseModel,
    pub output: OutputSection,
    /// Directory against which dataset paths are resolved.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for GasSection {
    fn default() -> Self {
        Self {
            species: GasSpecies::Hydrogen,
            pressure_bar: 12.0,
            temperature_k: crate::constants::ROOM_TEMPERATURE_K,
            compressibility: Compressibility::Ideal,
            dispersion: "h2-peck-huang-1977".into(),
        }
    }
}

impl Default for FieldsSection {
    fn default() -> Self {
        let field = |wavelength_nm, power_w| FieldSpec {
            wavelength_nm,
            power_w,
            polarization: default_polarization(),
        };
        Self {
            pump: field(938.0, 0.05),
            stokes: field(1538.0, 0.05),
            probe: field(863.0, 1e-3),
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            fiber: FiberGeometry::reference(),
            gas: GasSection::default(),
            fields: FieldsSection::default(),
            raman: RamanSection {
                transition: "h2-q11".into(),
            },
            model: ModelSection::default(),
            detection: DetectionChain::default(),
            noise: NoiseModel::default(),
            output: OutputSection::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config(e.to_string()))?;
        if raw
            .get("fields")
            .and_then(|f| f.as_table())
            .is_some_and(|f| f.contains_key("signal"))
        {
            return Err(Error::config(
                "the signal field cannot be configured; it is derived from pump, stokes and probe",
            ));
        }
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.fiber.validate()?;
        self.detection.validate()?;
        self.noise.validate()?;
        self.conversion()?;
        Ok(())
    }

    fn resolve(&self, reference: &str) -> PathBuf {
        let p = Path::new(reference);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn dispersion_data(&self) -> Result<GasDispersionData> {
        let name = &self.gas.dispersion;
        if GasDispersionData::builtin_names().contains(&name.as_str()) {
            GasDispersionData::builtin(name)
        } else {
            GasDispersionData::load(&self.resolve(name))
        }
    }

    pub fn raman_transition(&self) -> Result<RamanTransition> {
        let name = &self.raman.transition;
        if name == "h2-q11" {
            RamanTransition::builtin(name)
        } else {
            RamanTransition::load(&self.resolve(name))
        }
    }

    fn field(spec: &FieldSpec, role: FieldRole) -> Result<OpticalField> {
        let mut f = OpticalField::from_wavelength(role, spec.wavelength_nm, spec.power_w)
            .map_err(|e| Error::config(format!("fields.{role}: {e}")))?;
        f.polarization = JonesVector::parse(&spec.polarization)?;
        Ok(f)
    }

    pub fn conversion(&self) -> Result<ConversionConfig> {
        let gas = GasState {
            species: self.gas.species.clone(),
            pressure_bar: self.gas.pressure_bar,
            temperature_k: self.gas.temperature_k,
            compressibility: self.gas.compressibility.clone(),
        };
        let mut c = ConversionConfig::new(
            Self::field(&self.fields.pump, FieldRole::Pump)?,
            Self::field(&self.fields.stokes, FieldRole::Stokes)?,
            Self::field(&self.fields.probe, FieldRole::Probe)?,
            self.fiber.clone(),
            gas,
            self.dispersion_data()?,
            self.raman_transition()?,
        )
        .map_err(|e| match e {
            Error::Domain(msg) => Error::Config(msg),
            other => other,
        })?;
        c.index = IndexModel::Fiber(IndexOptions {
            wall_correction: self.model.wall_correction,
            exclusion_band_nm: self.model.exclusion_band_nm,
        });
        c.chi3_model = self.model.chi3;
        c.chi3_amplitude = self.model.chi3_amplitude;
        c.beat_window_ghz = self.model.beat_window_ghz;
        c.validate()?;
        Ok(c)
    }

    /// SHA-256 over the canonical JSON of this configuration together with
    /// the resolved dataset contents.
    pub fn hash(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Canonical<'a> {
            run: &'a RunConfig,
            dispersion_data: GasDispersionData,
            raman: RamanTransition,
        }
        Ok(hash_json(&Canonical {
            run: self,
            dispersion_data: self.dispersion_data()?,
            raman: self.raman_transition()?,
        }))
    }

    /// `override_dir`, else the environment override, else the configured directory.
    pub fn output_dir(&self, override_dir: Option<&Path>) -> PathBuf {
        if let Some(d) = override_dir {
            return d.to_path_buf();
        }
        match std::env::var_os(OUT_DIR_ENV) {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => self.output.dir.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_reference() {
        let c = RunConfig::from_toml_str("", Path::new(".")).unwrap();
        assert_eq!(c, RunConfig::default());
        let conv = c.conversion().unwrap();
        let reference = ConversionConfig::reference();
        assert_eq!(conv.config_hash(), reference.config_hash());
    }

    #[test]
    fn explicit_defaults_hash_like_omitted() {
        let explicit = r#"
[fiber]
core_radius_um = 13.2
wall_thickness_nm = 360
capillary_count = 5
length_m = 0.27

[raman]
transition = "h2-q11"
"#;
        let a = RunConfig::from_toml_str(explicit, Path::new(".")).unwrap();
        let b = RunConfig::from_toml_str("", Path::new(".")).unwrap();
        assert_eq!(a.hash().unwrap(), b.hash().unwrap());
        let changed = RunConfig::from_toml_str("[model]\nchi3_amplitude = 2.0\n", Path::new(".")).unwrap();
        assert_ne!(changed.hash().unwrap(), b.hash().unwrap());
    }

    #[test]
    fn signal_is_rejected() {
        let text = r#"
[fields]
pump = { wavelength_nm = 938.0, power_w = 0.05 }
stokes = { wavelength_nm = 1538.0, power_w = 0.05 }
probe = { wavelength_nm = 863.0, power_w = 0.001 }
signal = { wavelength_nm = 1346.0, power_w = 0.0 }
"#;
        let e = RunConfig::from_toml_str(text, Path::new(".")).unwrap_err();
        assert!(e.to_string().contains("derived"), "{e}");
    }

    #[test]
    fn bad_values_are_config_errors() {
        for text in [
            "[model]\nunknown_key = 1\n",
            "[gas]\nspecies='hydrogen'\npressure_bar=1\ntemperature_k=293\ndispersion='nope.toml'\n",
            "[detection]\nfiber_coupling = 1.5\n",
            "[fields]\npump={wavelength_nm=1600.0,power_w=0.05}\nstokes={wavelength_nm=938.0,power_w=0.05}\nprobe={wavelength_nm=863.0,power_w=0.001}\n",
        ] {
            let e = RunConfig::from_toml_str(text, Path::new(".")).unwrap_err();
            assert!(
                matches!(e.kind(), crate::ErrorKind::Config | crate::ErrorKind::Io),
                "{text}: {e:?}"
            );
        }
    }

    #[test]
    fn dataset_paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        let data = include_str!("../data/h2_peck_huang_1977.toml");
        std::fs::write(dir.path().join("h2.toml"), data).unwrap();
        let cfg_path = dir.path().join("run.toml");
        std::fs::write(
            &cfg_path,
            "[gas]\nspecies='hydrogen'\npressure_bar=5\ntemperature_k=293.15\ndispersion='h2.toml'\n",
        )
        .unwrap();
        let c = RunConfig::load(&cfg_path).unwrap();
        assert_eq!(c.dispersion_data().unwrap(), GasDispersionData::hydrogen());
    }

    #[test]
    fn partial_sections_inherit_reference_values() {
        let c = RunConfig::from_toml_str(
            "[gas]\npressure_bar = 7.5\n\n[fields.probe]\nwavelength_nm = 870.0\npower_w = 2e-3\n",
            Path::new("."),
        )
        .unwrap();
        let d = RunConfig::default();
        assert_eq!(c.gas.pressure_bar, 7.5);
        assert_eq!(c.gas.dispersion, d.gas.dispersion);
        assert_eq!(c.fields.pump, d.fields.pump);
        assert_eq!(c.fields.probe.wavelength_nm, 870.0);
    }
}
