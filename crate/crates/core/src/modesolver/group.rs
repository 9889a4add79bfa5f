// SPDX-License-Identifier: Apache-2.0

use serde::Serialize;

use super::modes::nearest_root;
use super::{GuidedMode, Polarization, Waveguide};
use crate::error::{Error, Result};

/// Wavelength step of the central differences.
pub const FD_STEP_NM: f64 = 0.1;
/// Largest n_eff change accepted between neighbouring tracking steps.
pub const MAX_TRACKING_JUMP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupIndex {
    /// n_g = c·dβ/dω = n − λ dn/dλ.
    pub value: f64,
    /// Richardson error estimate.
    pub error: f64,
}

/// Group index from any wavelength → index map, by central differences at
/// `h` and `h/2` combined with one Richardson level.
pub fn group_index<F>(n_eff_at: F, lambda_nm: f64, h_nm: f64) -> Result<GroupIndex>
where
    F: Fn(f64) -> Result<f64>,
{
    let n0 = n_eff_at(lambda_nm)?;
    let slope = |h: f64| -> Result<f64> { Ok((n_eff_at(lambda_nm + h)? - n_eff_at(lambda_nm - h)?) / (2.0 * h)) };
    let coarse = slope(h_nm)?;
    let fine = slope(h_nm / 2.0)?;
    let extrapolated = (4.0 * fine - coarse) / 3.0;
    Ok(GroupIndex {
        value: n0 - lambda_nm * extrapolated,
        error: lambda_nm * (fine - coarse).abs() / 3.0,
    })
}

/// Follows one mode of a waveguide across wavelength by n_eff continuity.
#[derive(Debug, Clone)]
pub struct ModeTracker<'a> {
    waveguide: &'a Waveguide,
    pol: Polarization,
    lambda_ref_nm: f64,
    n_ref: f64,
}

impl<'a> ModeTracker<'a> {
    pub fn new(waveguide: &'a Waveguide, mode: &GuidedMode) -> Self {
        ModeTracker {
            waveguide,
            pol: mode.pol,
            lambda_ref_nm: mode.lambda_nm,
            n_ref: mode.n_eff,
        }
    }

    pub fn n_ref(&self) -> f64 {
        self.n_ref
    }

    pub fn lambda_ref_nm(&self) -> f64 {
        self.lambda_ref_nm
    }

    /// n_eff of the tracked mode at `lambda_nm`, starting from `guess`.
    pub fn n_eff_near(&self, lambda_nm: f64, guess: f64) -> Result<f64> {
        let profile = self.waveguide.profile(lambda_nm, self.pol)?;
        nearest_root(&profile, guess, MAX_TRACKING_JUMP).ok_or_else(|| {
            Error::ModeTracking(format!(
                "{} mode with n_eff ≈ {guess:.6} lost at {lambda_nm} nm (no root within {MAX_TRACKING_JUMP})",
                self.pol
            ))
        })
    }

    /// n_eff at a wavelength close to the reference.
    pub fn n_eff_at(&self, lambda_nm: f64) -> Result<f64> {
        if lambda_nm == self.lambda_ref_nm {
            return Ok(self.n_ref);
        }
        self.n_eff_near(lambda_nm, self.n_ref)
    }

    pub fn group_index(&self) -> Result<GroupIndex> {
        self.group_index_with_step(FD_STEP_NM)
    }

    pub fn group_index_with_step(&self, h_nm: f64) -> Result<GroupIndex> {
        group_index(|l| self.n_eff_at(l), self.lambda_ref_nm, h_nm)
    }
}
