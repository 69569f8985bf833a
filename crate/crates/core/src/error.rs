use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of a model or formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// Wavelength falls inside the exclusion band around a capillary resonance.
    #[error(
        "wavelength {wavelength_nm:.3} nm lies within {band_nm} nm of capillary resonance \
         m={order} at {resonance_nm:.3} nm"
    )]
    ResonanceProximity {
        wavelength_nm: f64,
        resonance_nm: f64,
        order: u32,
        band_nm: f64,
    },

    /// The guided mode is cut off: the effective index would be imaginary.
    #[error("mode cutoff at {wavelength_nm:.3} nm (core radius {core_radius_um} um)")]
    Cutoff { wavelength_nm: f64, core_radius_um: f64 },

    /// Measured count rate saturates the dead-time model.
    #[error("detector saturated: measured rate {rate_cps} cps with dead time {dead_time_s} s")]
    Saturation { rate_cps: f64, dead_time_s: f64 },

    /// A dispersion evaluation failed for one of the four optical fields.
    #[error("{role} field: {source}")]
    Field {
        role: crate::phasematch::FieldRole,
        #[source]
        source: Box<Error>,
    },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse error classes, one per CLI exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Parse,
    Numerical,
    Domain,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Domain(_)
            | Error::ResonanceProximity { .. }
            | Error::Cutoff { .. }
            | Error::Saturation { .. } => ErrorKind::Domain,
            Error::Field { source, .. } => source.kind(),
            Error::Numerical(_) => ErrorKind::Numerical,
            Error::Config(_) => ErrorKind::Config,
            Error::Parse { .. } => ErrorKind::Parse,
            Error::Io { .. } => ErrorKind::Io,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
