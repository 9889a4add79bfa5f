// SPDX-License-Identifier: Apache-2.0

//! Transfer-matrix mode solver for planar multilayer waveguides.
//!
//! A waveguide is described at fixed wavelength and polarization by an
//! [`IndexProfile`]: a finite run of inner layers (the core region) bounded on
//! each side by a cladding. A cladding is either a homogeneous half-space or a
//! periodic reflector. Periodic claddings are terminated by their decaying Bloch
//! wave, which is the semi-infinite continuation of the reflector, so the
//! dispersion function is real for both TIR and Bragg modes.
//!
//! Field state through a layer is the pair `(u, p·u')` with `p = 1` for TE
//! (u = E_y) and `p = 1/n²` for TM (u = H_y); both entries are tangential and
//! continuous across interfaces.

mod group;
mod modes;
mod stack;
mod transfer;

pub use group::{group_index, GroupIndex, ModeTracker, FD_STEP_NM, MAX_TRACKING_JUMP};
pub use modes::{
    default_search_range, field_profile, find_modes, find_modes_in, select_mode, FieldEvaluator,
    FieldGrid, GuidedMode, ModeField, ModeSelector, DEFAULT_GRID_STEP_NM, FIELD_PADDING_NM,
    ROOT_TOLERANCE, SCAN_STEP,
};
pub use stack::{quarter_wave_deviation, LayerStack, Waveguide, DEFAULT_BILAYERS};
pub use transfer::{dispersion_function, layer_matrix, transfer_matrix, Matrix2c};

use serde::{Deserialize, Serialize};

pub use crate::material::Polarization;

/// Guidance mechanism of a mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModeClass {
    /// Evanescent in the low-index cladding material.
    #[serde(rename = "TIR")]
    Tir,
    /// Oscillatory in every cladding layer; confined by distributed reflection.
    Bragg,
}

impl std::fmt::Display for ModeClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModeClass::Tir => f.write_str("TIR"),
            ModeClass::Bragg => f.write_str("Bragg"),
        }
    }
}

impl std::str::FromStr for ModeClass {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tir" => Ok(ModeClass::Tir),
            "bragg" => Ok(ModeClass::Bragg),
            other => Err(crate::Error::InvalidInput(format!(
                "unknown mode class '{other}' (expected TIR or Bragg)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer {
    pub index: f64,
    pub thickness_nm: f64,
}

impl Layer {
    pub fn new(index: f64, thickness_nm: f64) -> Self {
        Layer {
            index,
            thickness_nm,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cladding {
    /// Semi-infinite uniform medium.
    Homogeneous { index: f64 },
    /// Reflector whose unit cell is listed from the core outward. `repeats`
    /// cells are drawn explicitly; beyond them the cell continues periodically.
    Periodic { cell: Vec<Layer>, repeats: usize },
}

impl Cladding {
    fn indices(&self) -> Vec<f64> {
        match self {
            Cladding::Homogeneous { index } => vec![*index],
            Cladding::Periodic { cell, .. } => cell.iter().map(|l| l.index).collect(),
        }
    }

    fn explicit_thickness_nm(&self) -> f64 {
        match self {
            Cladding::Homogeneous { .. } => 0.0,
            Cladding::Periodic { cell, repeats } => {
                *repeats as f64 * cell.iter().map(|l| l.thickness_nm).sum::<f64>()
            }
        }
    }
}

/// Refractive-index profile of a planar guide at one wavelength and polarization.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexProfile {
    pub lambda_nm: f64,
    pub pol: Polarization,
    pub left: Cladding,
    /// Inner layers from left to right.
    pub layers: Vec<Layer>,
    pub right: Cladding,
}

impl IndexProfile {
    /// Symmetric three-layer slab: core of index `core` and thickness `t_nm`
    /// between half-spaces of index `clad`.
    pub fn symmetric_slab(clad: f64, core: f64, t_nm: f64, lambda_nm: f64, pol: Polarization) -> Self {
        IndexProfile {
            lambda_nm,
            pol,
            left: Cladding::Homogeneous { index: clad },
            layers: vec![Layer::new(core, t_nm)],
            right: Cladding::Homogeneous { index: clad },
        }
    }

    /// Wavenumber in 1/nm.
    pub fn k0(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.lambda_nm
    }

    pub fn max_index(&self) -> f64 {
        self.all_indices().into_iter().fold(f64::MIN, f64::max)
    }

    pub fn min_index(&self) -> f64 {
        self.all_indices().into_iter().fold(f64::MAX, f64::min)
    }

    fn all_indices(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.layers.iter().map(|l| l.index).collect();
        v.extend(self.left.indices());
        v.extend(self.right.indices());
        v
    }

    /// Lowest index found in either cladding; the TIR/Bragg boundary.
    pub fn cladding_floor(&self) -> f64 {
        self.left
            .indices()
            .into_iter()
            .chain(self.right.indices())
            .fold(f64::MAX, f64::min)
    }

    pub fn classify(&self, n_eff: f64) -> ModeClass {
        if n_eff > self.cladding_floor() {
            ModeClass::Tir
        } else {
            ModeClass::Bragg
        }
    }

    /// Full finite layer sequence (left cladding cells, inner layers, right
    /// cladding cells) from left to right, zero-thickness layers removed.
    pub fn expanded_layers(&self) -> Vec<Layer> {
        let mut out = Vec::new();
        if let Cladding::Periodic { cell, repeats } = &self.left {
            for _ in 0..*repeats {
                out.extend(cell.iter().rev().copied());
            }
        }
        out.extend(self.layers.iter().copied());
        if let Cladding::Periodic { cell, repeats } = &self.right {
            for _ in 0..*repeats {
                out.extend(cell.iter().copied());
            }
        }
        out.retain(|l| l.thickness_nm > 0.0);
        out
    }

    /// Index at `y_nm` measured from the centre of the inner layers. Periodic
    /// claddings continue their cell beyond the drawn repeats.
    pub fn index_at(&self, y_nm: f64) -> f64 {
        let half = self.core_thickness_nm() / 2.0;
        if y_nm.abs() <= half {
            let mut edge = -half;
            for l in &self.layers {
                edge += l.thickness_nm;
                if y_nm <= edge {
                    return l.index;
                }
            }
            return self.layers.last().map_or(0.0, |l| l.index);
        }
        let side = if y_nm > 0.0 { &self.right } else { &self.left };
        match side {
            Cladding::Homogeneous { index } => *index,
            Cladding::Periodic { cell, .. } => {
                let period: f64 = cell.iter().map(|l| l.thickness_nm).sum();
                let mut d = (y_nm.abs() - half).rem_euclid(period);
                for l in cell {
                    if d < l.thickness_nm {
                        return l.index;
                    }
                    d -= l.thickness_nm;
                }
                cell.last().map_or(0.0, |l| l.index)
            }
        }
    }

    /// Thickness of the inner layers.
    pub fn core_thickness_nm(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness_nm).sum()
    }

    /// Thickness of the drawn structure (inner layers plus explicit cladding cells).
    pub fn total_thickness_nm(&self) -> f64 {
        self.core_thickness_nm()
            + self.left.explicit_thickness_nm()
            + self.right.explicit_thickness_nm()
    }

    /// True when left and right claddings are identical and the inner layers
    /// form a palindrome.
    pub fn is_symmetric(&self) -> bool {
        self.left == self.right && self.layers.iter().eq(self.layers.iter().rev())
    }
}
