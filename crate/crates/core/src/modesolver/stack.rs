// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::modes::{default_search_range, find_modes_in, select_mode, DEFAULT_GRID_STEP_NM};
use super::{Cladding, GuidedMode, IndexProfile, Layer, ModeClass, Polarization};
use crate::error::{Error, Result};
use crate::material::MaterialModel;

/// Bilayers on each side of the core.
pub const DEFAULT_BILAYERS: usize = 12;

fn default_bilayers() -> usize {
    DEFAULT_BILAYERS
}

/// Bragg reflection waveguide geometry.
///
/// Structure files are TOML with the keys below; thicknesses in nm, Al
/// fractions in [0, 1], `L` in mm and the poling period `Λ` (or `Lambda`) in µm:
///
/// ```toml
/// t_c = 1037.0
/// t_1 = 463.0
/// t_2 = 810.0
/// x_c = 0.57
/// x_1 = 0.44
/// x_2 = 0.88
/// "Λ" = 10.4
/// L = 4.0
/// n_bilayers = 12
/// ```
///
/// Layer 1 is adjacent to the core on both sides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerStack {
    pub t_c: f64,
    pub t_1: f64,
    pub t_2: f64,
    pub x_c: f64,
    pub x_1: f64,
    pub x_2: f64,
    #[serde(rename = "Λ", alias = "Lambda", default, skip_serializing_if = "Option::is_none")]
    pub qpm_period_um: Option<f64>,
    #[serde(rename = "L")]
    pub length_mm: f64,
    #[serde(default = "default_bilayers")]
    pub n_bilayers: usize,
}

impl LayerStack {
    pub fn validate(&self) -> Result<()> {
        for (name, t) in [("t_c", self.t_c), ("t_1", self.t_1), ("t_2", self.t_2)] {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} = {t} nm must be positive")));
            }
        }
        for (name, x) in [("x_c", self.x_c), ("x_1", self.x_1), ("x_2", self.x_2)] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::InvalidInput(format!("{name} = {x} must lie in [0, 1]")));
            }
        }
        if self.n_bilayers < 1 {
            return Err(Error::InvalidInput("n_bilayers must be at least 1".into()));
        }
        if !(self.length_mm > 0.0 && self.length_mm.is_finite()) {
            return Err(Error::InvalidInput(format!("L = {} mm must be positive", self.length_mm)));
        }
        if let Some(p) = self.qpm_period_um {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::InvalidInput(format!("Λ = {p} µm must be positive")));
            }
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let stack: LayerStack = toml::from_str(text).map_err(|e| Error::parse("structure file", e))?;
        stack.validate()?;
        Ok(stack)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::parse(path.display().to_string(), message),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("LayerStack always serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_toml_string()).map_err(|e| Error::io(path, e))
    }

    pub fn length_m(&self) -> f64 {
        self.length_mm * 1e-3
    }
}

/// A layer stack bound to a material model.
#[derive(Debug, Clone)]
pub struct Waveguide {
    pub stack: LayerStack,
    pub material: Arc<MaterialModel>,
}

impl Waveguide {
    pub fn new(stack: LayerStack, material: Arc<MaterialModel>) -> Result<Self> {
        stack.validate()?;
        Ok(Waveguide { stack, material })
    }

    /// Index profile at one wavelength: core with periodic reflectors
    /// `[layer 1, layer 2]` repeating outward on both sides.
    pub fn profile(&self, lambda_nm: f64, pol: Polarization) -> Result<IndexProfile> {
        let s = &self.stack;
        let n = |x: f64| self.material.refractive_index(x, lambda_nm, pol);
        let cell = vec![Layer::new(n(s.x_1)?, s.t_1), Layer::new(n(s.x_2)?, s.t_2)];
        let clad = Cladding::Periodic {
            cell,
            repeats: s.n_bilayers,
        };
        Ok(IndexProfile {
            lambda_nm,
            pol,
            left: clad.clone(),
            layers: vec![Layer::new(n(s.x_c)?, s.t_c)],
            right: clad,
        })
    }

    pub fn find_modes(&self, lambda_nm: f64, pol: Polarization, range: Option<(f64, f64)>) -> Result<Vec<GuidedMode>> {
        let profile = self.profile(lambda_nm, pol)?;
        let range = range.unwrap_or_else(|| default_search_range(&profile));
        find_modes_in(&profile, range, DEFAULT_GRID_STEP_NM)
    }

    /// The `class` mode with the largest core confinement.
    pub fn select_mode(&self, lambda_nm: f64, pol: Polarization, class: ModeClass) -> Result<GuidedMode> {
        self.select_mode_on_grid(lambda_nm, pol, class, DEFAULT_GRID_STEP_NM)
    }

    pub fn select_mode_on_grid(
        &self,
        lambda_nm: f64,
        pol: Polarization,
        class: ModeClass,
        grid_step_nm: f64,
    ) -> Result<GuidedMode> {
        let profile = self.profile(lambda_nm, pol)?;
        select_mode(&profile, class, grid_step_nm)
    }
}

/// Relative deviation from the quarter-wave condition, `t·κ/(π/2) − 1`, for each
/// layer of the right-hand reflector cell (ordered from the core outward).
/// κ is the magnitude of the transverse wavevector in the layer.
pub fn quarter_wave_deviation(profile: &IndexProfile, n_eff: f64) -> Vec<f64> {
    let k0 = profile.k0();
    let cell: Vec<Layer> = match &profile.right {
        Cladding::Periodic { cell, .. } => cell.clone(),
        Cladding::Homogeneous { .. } => profile.layers.clone(),
    };
    cell.iter()
        .map(|l| {
            let kappa = k0 * (l.index * l.index - n_eff * n_eff).abs().sqrt();
            l.thickness_nm * kappa / std::f64::consts::FRAC_PI_2 - 1.0
        })
        .collect()
}
