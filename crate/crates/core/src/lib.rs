//! Modelling toolkit for continuous-wave four-wave-mixing frequency conversion
//! in gas-filled anti-resonant hollow-core fiber.
//!
//! The crate covers the capillary-fiber dispersion model, phase matching and
//! the sinc² conversion law (with pressure gradients), the Raman line shape,
//! polarization analysis of projection data, and detection-chain bookkeeping.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod constants;
pub mod detection;
pub mod dispersion;
pub mod error;
pub mod io;
pub mod output;
pub mod phasematch;
pub mod polarization;
pub mod quadrature;
pub mod ramanline;

pub use error::{Error, ErrorKind, Result};
