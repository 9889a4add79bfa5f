// SPDX-License-Identifier: Apache-2.0

//! Two-photon joint spectral amplitude of type-II SPDC in a waveguide.
//!
//! Frequencies are detunings Ω (rad/s) from each photon's central frequency;
//! wavelengths appear only at the boundaries. Wavevectors are in rad/µm and
//! the device length is in mm, converted internally.
//!
//! The pump envelope is `E_p(Ω) = exp(−Ω²/Δω_p²)`. Pump bandwidths quoted in nm
//! are `Δλ_p = λ_p²·Δω_p/(2πc)`, i.e. Δω_p itself expressed as a wavelength
//! interval.

mod dispersion;
mod jsa;
mod overlap;

pub use dispersion::{LinearDispersion, ModeDispersion, TrackedDispersion};
pub use jsa::{
    compute_jsa_full, compute_jsa_linear, GridSpec, JointSpectralAmplitude, ResolvedGrid,
    DEFAULT_GRID_POINTS, LOBES_IN_SPAN, PUMP_SIGMAS_IN_SPAN,
};
pub use overlap::{mode_overlap, Overlap, OVERLAP_PERCENT_SCALE};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modesolver::{GuidedMode, ModeClass, ModeSelector, Polarization, Waveguide};
use crate::SPEED_OF_LIGHT;
use dispersion::C_UM_PER_S;

/// Gaussian-width constant of the sinc approximation behind the optimal
/// pump bandwidth.
pub const SINC_GAUSSIAN_ALPHA: f64 = 0.439;

/// Below this |Δk⁰| (rad/µm) the process counts as already phase matched.
pub const PHASE_MATCHED_TOLERANCE: f64 = 1e-12;

/// Converts a bandwidth in nm at `lambda_nm` to rad/s.
pub fn bandwidth_nm_to_rad_s(lambda_nm: f64, bandwidth_nm: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT * (bandwidth_nm * 1e-9) / (lambda_nm * 1e-9).powi(2)
}

/// Converts a bandwidth in rad/s to nm at `lambda_nm`.
pub fn bandwidth_rad_s_to_nm(lambda_nm: f64, bandwidth: f64) -> f64 {
    bandwidth * (lambda_nm * 1e-9).powi(2) / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT) * 1e9
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpSpec {
    pub lambda_nm: f64,
    /// Δω_p, rad/s.
    pub bandwidth: f64,
}

impl PumpSpec {
    pub fn new(lambda_nm: f64, bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "pump bandwidth must be positive, got {bandwidth} rad/s"
            )));
        }
        if !(lambda_nm > 0.0 && lambda_nm.is_finite()) {
            return Err(Error::InvalidInput(format!("pump wavelength {lambda_nm} nm")));
        }
        Ok(PumpSpec { lambda_nm, bandwidth })
    }

    pub fn from_bandwidth_nm(lambda_nm: f64, bandwidth_nm: f64) -> Result<Self> {
        if !(bandwidth_nm > 0.0) {
            return Err(Error::InvalidInput(format!(
                "pump bandwidth must be positive, got {bandwidth_nm} nm"
            )));
        }
        Self::new(lambda_nm, bandwidth_nm_to_rad_s(lambda_nm, bandwidth_nm))
    }

    pub fn bandwidth_nm(&self) -> f64 {
        bandwidth_rad_s_to_nm(self.lambda_nm, self.bandwidth)
    }

    pub fn envelope(&self, omega: f64) -> f64 {
        (-(omega / self.bandwidth).powi(2)).exp()
    }
}

/// Mode roles, central wavelengths, length and poling of a down-conversion process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub signal_nm: f64,
    pub idler_nm: f64,
    pub pump_mode: ModeSelector,
    pub signal_mode: ModeSelector,
    pub idler_mode: ModeSelector,
    pub length_mm: f64,
    /// Poling period in µm. `None` derives it from the central phase mismatch.
    pub qpm_period_um: Option<f64>,
}

impl ProcessSpec {
    /// Degenerate type-II process: TE TIR pump, TE Bragg signal, TM TIR idler.
    pub fn type_ii(signal_nm: f64, idler_nm: f64, length_mm: f64) -> Self {
        ProcessSpec {
            signal_nm,
            idler_nm,
            pump_mode: ModeSelector { pol: Polarization::TE, class: ModeClass::Tir },
            signal_mode: ModeSelector { pol: Polarization::TE, class: ModeClass::Bragg },
            idler_mode: ModeSelector { pol: Polarization::TM, class: ModeClass::Tir },
            length_mm,
            qpm_period_um: None,
        }
    }

    /// Pump wavelength fixed by energy conservation.
    pub fn pump_nm(&self) -> f64 {
        1.0 / (1.0 / self.signal_nm + 1.0 / self.idler_nm)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("signal wavelength", self.signal_nm), ("idler wavelength", self.idler_nm), ("length", self.length_mm)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if let Some(p) = self.qpm_period_um {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::InvalidInput(format!("poling period must be positive, got {p} µm")));
            }
        }
        Ok(())
    }

    /// Checks that a pump matches the energy-conserving pump wavelength.
    pub fn check_pump(&self, pump: &PumpSpec) -> Result<()> {
        let expected = self.pump_nm();
        if (pump.lambda_nm - expected).abs() > 1e-6 * expected {
            return Err(Error::InvalidInput(format!(
                "pump at {} nm violates energy conservation (expected {expected} nm)",
                pump.lambda_nm
            )));
        }
        Ok(())
    }
}

/// The three modes of a process solved at their central wavelengths.
#[derive(Debug, Clone)]
pub struct ProcessModes {
    pub pump: GuidedMode,
    pub signal: GuidedMode,
    pub idler: GuidedMode,
}

impl ProcessModes {
    pub fn solve(waveguide: &Waveguide, process: &ProcessSpec) -> Result<Self> {
        process.validate()?;
        let pick = |lambda: f64, sel: ModeSelector| waveguide.select_mode(lambda, sel.pol, sel.class);
        Ok(ProcessModes {
            pump: pick(process.pump_nm(), process.pump_mode)?,
            signal: pick(process.signal_nm, process.signal_mode)?,
            idler: pick(process.idler_nm, process.idler_mode)?,
        })
    }

    /// Δk⁰ = β_p − β_s − β_i at the central frequencies, rad/µm.
    pub fn central_mismatch(&self) -> f64 {
        self.pump.beta - self.signal.beta - self.idler.beta
    }
}

/// Group indices of pump, signal and idler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupIndices {
    pub pump: f64,
    pub signal: f64,
    pub idler: f64,
}

impl GroupIndices {
    /// Group velocities as fractions of c.
    pub fn velocities(&self) -> [f64; 3] {
        [1.0 / self.pump, 1.0 / self.signal, 1.0 / self.idler]
    }
}

/// Poling period (µm) compensating a central mismatch Δk⁰ (rad/µm).
///
/// A negative Δk⁰ yields the period of |Δk⁰| with the grating vector reversed.
pub fn qpm_period(central_mismatch: f64) -> Result<f64> {
    if !(central_mismatch.abs() >= PHASE_MATCHED_TOLERANCE) {
        return Err(Error::AlreadyPhaseMatched(central_mismatch.abs()));
    }
    if central_mismatch < 0.0 {
        log::info!("central mismatch is negative ({central_mismatch:e} rad/µm); reversing the grating vector");
    }
    Ok(2.0 * std::f64::consts::PI / central_mismatch.abs())
}

/// Pump bandwidth Δω_p (rad/s) that removes frequency correlations when the
/// pump group index lies between those of signal and idler.
pub fn optimal_pump_bandwidth(n_p: f64, n_s: f64, n_i: f64, length_mm: f64) -> Result<f64> {
    let product = (n_s - n_p) * (n_p - n_i);
    if !(product > 0.0) {
        return Err(Error::NoSeparabilityPoint(product));
    }
    if !(length_mm > 0.0) {
        return Err(Error::InvalidInput(format!("length must be positive, got {length_mm} mm")));
    }
    Ok(2.0 * SPEED_OF_LIGHT / (SINC_GAUSSIAN_ALPHA * length_mm * 1e-3 * product.sqrt()))
}

/// Dispersion of the three interacting modes plus length and poling.
pub struct Interaction {
    pub pump: Box<dyn ModeDispersion>,
    pub signal: Box<dyn ModeDispersion>,
    pub idler: Box<dyn ModeDispersion>,
    pub length_mm: f64,
    /// `None` means no poling (Λ → ∞).
    pub qpm_period_um: Option<f64>,
}

impl Interaction {
    /// Interaction of tracked waveguide modes. The poling period is taken from
    /// the process, or derived from the central mismatch when absent.
    pub fn from_waveguide(waveguide: &Waveguide, process: &ProcessSpec) -> Result<(Self, ProcessModes)> {
        let modes = ProcessModes::solve(waveguide, process)?;
        let period = match process.qpm_period_um {
            Some(p) => p,
            None => qpm_period(modes.central_mismatch())?,
        };
        let wrap = |m: &GuidedMode, role| -> Box<dyn ModeDispersion> {
            Box::new(TrackedDispersion::new(waveguide.clone(), m.clone(), role))
        };
        let interaction = Interaction {
            pump: wrap(&modes.pump, "pump"),
            signal: wrap(&modes.signal, "signal"),
            idler: wrap(&modes.idler, "idler"),
            length_mm: process.length_mm,
            qpm_period_um: Some(period),
        };
        Ok((interaction, modes))
    }

    pub fn length_um(&self) -> f64 {
        self.length_mm * 1e3
    }

    pub fn central_mismatch(&self) -> Result<f64> {
        Ok(self.pump.beta(0.0)? - self.signal.beta(0.0)? - self.idler.beta(0.0)?)
    }

    /// Signed grating vector 2π/Λ (rad/µm), oriented to cancel Δk⁰.
    pub fn grating_vector(&self) -> Result<f64> {
        match self.qpm_period_um {
            None => Ok(0.0),
            Some(p) => Ok(2.0 * std::f64::consts::PI / p * self.central_mismatch()?.signum()),
        }
    }

    pub fn group_indices(&self) -> Result<GroupIndices> {
        Ok(GroupIndices {
            pump: self.pump.group_index()?,
            signal: self.signal.group_index()?,
            idler: self.idler.group_index()?,
        })
    }

    /// Δk − 2π/Λ (rad/µm) at detunings Ω_s, Ω_i using the full dispersion.
    pub fn phase_mismatch(&self, omega_s: f64, omega_i: f64) -> Result<f64> {
        let dk = self.pump.beta(omega_s + omega_i)? - self.signal.beta(omega_s)? - self.idler.beta(omega_i)?;
        Ok(dk - self.grating_vector()?)
    }
}

/// Δk of a first-order (group-index) expansion, rad/µm.
pub fn linear_mismatch(g: &GroupIndices, omega_s: f64, omega_i: f64) -> f64 {
    ((g.pump - g.signal) * omega_s + (g.pump - g.idler) * omega_i) / C_UM_PER_S
}
