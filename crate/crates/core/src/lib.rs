// SPDX-License-Identifier: Apache-2.0

//! Spontaneous parametric down-conversion in AlGaN Bragg reflection waveguides.
//!
//! The crate is organised as a pipeline:
//!
//! * [`material`] loads composition- and polarization-dependent Sellmeier data.
//! * [`modesolver`] finds TIR and Bragg modes of planar multilayer stacks with the
//!   transfer-matrix method and computes field profiles and group indices.
//! * [`spdc`] builds the two-photon joint spectral amplitude, the quasi-phase-matching
//!   period and the modal overlap.
//! * [`schmidt`] quantifies frequency entanglement (Schmidt number, purity, entropy).
//! * [`optimizer`] searches layer parameters with a real-coded genetic algorithm.
//!
//! Lengths at the API boundary follow the conventions of the structure tables
//! (nm for layers and wavelengths, µm for the poling period, mm for device length).
//! Internally frequencies are detunings in rad/s and wavevectors are in rad/µm.

pub mod error;
pub mod material;
pub mod modesolver;
pub mod optimizer;
pub mod schmidt;
pub mod spdc;

pub use error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Angular frequency (rad/s) of a vacuum wavelength given in nm.
pub fn omega_from_wavelength_nm(lambda_nm: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / (lambda_nm * 1e-9)
}

/// Vacuum wavelength (nm) of an angular frequency in rad/s.
pub fn wavelength_nm_from_omega(omega: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / omega * 1e9
}
