// SPDX-License-Identifier: Apache-2.0

use serde::Serialize;

use super::transfer::{dispersion_function, layer_matrix_real, termination, Termination};
use super::{Cladding, IndexProfile, Layer, ModeClass, Polarization};
use crate::error::{Error, Result};

/// n_eff step of the sign-change scan.
pub const SCAN_STEP: f64 = 2e-4;
/// Guaranteed accuracy of refined roots.
pub const ROOT_TOLERANCE: f64 = 1e-10;
/// Extra outer medium drawn on each side of the stack.
pub const FIELD_PADDING_NM: f64 = 2000.0;
/// Default transverse sampling of field profiles.
pub const DEFAULT_GRID_STEP_NM: f64 = 2.0;

// Bisection runs well past ROOT_TOLERANCE so group-index finite differences
// are not limited by root noise.
const BISECTION_TOLERANCE: f64 = 1e-14;

/// Uniform transverse grid centred on the middle of the inner layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldGrid {
    pub start_nm: f64,
    pub step_nm: f64,
    pub len: usize,
}

impl FieldGrid {
    /// Grid covering the drawn stack plus [`FIELD_PADDING_NM`] on each side,
    /// symmetric about the centre of the inner layers.
    pub fn for_profile(profile: &IndexProfile, step_nm: f64) -> Self {
        let inner = profile.core_thickness_nm() / 2.0;
        let side = |c: &Cladding| match c {
            Cladding::Homogeneous { .. } => 0.0,
            Cladding::Periodic { cell, repeats } => {
                *repeats as f64 * cell.iter().map(|l| l.thickness_nm).sum::<f64>()
            }
        };
        let half = inner + side(&profile.left).max(side(&profile.right)) + FIELD_PADDING_NM;
        let n_half = (half / step_nm).ceil() as usize;
        FieldGrid {
            start_nm: -(n_half as f64) * step_nm,
            step_nm,
            len: 2 * n_half + 1,
        }
    }

    pub fn position_nm(&self, k: usize) -> f64 {
        // Index from the centre so the grid is exactly symmetric.
        let mid = (self.len / 2) as f64;
        (k as f64 - mid) * self.step_nm
    }

    pub fn positions_nm(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|k| self.position_nm(k))
    }

    pub fn step_um(&self) -> f64 {
        self.step_nm * 1e-3
    }
}

/// Sampled transverse field, normalised so that `Σ u² Δx = 1` with Δx in µm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeField {
    pub grid: FieldGrid,
    pub values: Vec<f64>,
}

impl ModeField {
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|u| u * u).sum::<f64>() * self.grid.step_um()
    }

    /// Inverse participation width `1 / Σ u⁴ Δx`, in µm.
    pub fn effective_width_um(&self) -> f64 {
        1.0 / (self.values.iter().map(|u| u.powi(4)).sum::<f64>() * self.grid.step_um())
    }
}

/// One guided mode at a single wavelength.
#[derive(Debug, Clone, Serialize)]
pub struct GuidedMode {
    pub pol: Polarization,
    pub class: ModeClass,
    pub n_eff: f64,
    pub lambda_nm: f64,
    /// Longitudinal wavevector, rad/µm.
    pub beta: f64,
    /// Fraction of Σu²Δx inside the inner layers.
    pub core_fraction: f64,
    pub field: ModeField,
}

/// Which mode of a structure plays a role in the process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct ModeSelector {
    pub pol: Polarization,
    pub class: ModeClass,
}

/// Evaluates the analytic field of a mode at arbitrary positions.
///
/// The inner layers span `[-T/2, T/2]`. Each cladding is evaluated in its own
/// outward frame from the terminating Bloch (or evanescent) state, scaled per
/// cell by the Bloch multiplier, which keeps the evaluation stable far from
/// the core.
#[derive(Debug, Clone)]
pub struct FieldEvaluator {
    pol: Polarization,
    k0: f64,
    n_eff: f64,
    half_core: f64,
    inner: Vec<(Layer, f64, [f64; 2])>,
    left: (Termination, Cladding),
    right: (Termination, Cladding),
    right_scale: f64,
}

impl FieldEvaluator {
    pub fn new(profile: &IndexProfile, n_eff: f64) -> Option<Self> {
        let k0 = profile.k0();
        let pol = profile.pol;
        let left = termination(&profile.left, n_eff, k0, pol)?;
        let right = termination(&profile.right, n_eff, k0, pol)?;
        let half_core = profile.core_thickness_nm() / 2.0;
        let mut state = [left.state[0], -left.state[1]];
        let mut y = -half_core;
        let mut inner = Vec::new();
        for layer in profile.layers.iter().filter(|l| l.thickness_nm > 0.0) {
            inner.push((*layer, y, state));
            state = layer_matrix_real(layer.index, layer.thickness_nm, n_eff, k0, pol).apply(state);
            y += layer.thickness_nm;
        }
        // At a root `state` is parallel to the right termination state.
        let right_scale = state[0] * right.state[0] + state[1] * right.state[1];
        Some(FieldEvaluator {
            pol,
            k0,
            n_eff,
            half_core,
            inner,
            left: (left, profile.left.clone()),
            right: (right, profile.right.clone()),
            right_scale,
        })
    }

    /// Interface positions (nm) of the drawn structure.
    pub fn interfaces(&self, profile: &IndexProfile) -> Vec<f64> {
        let mut out = vec![-self.half_core];
        let mut y = -self.half_core;
        for (layer, _, _) in &self.inner {
            y += layer.thickness_nm;
            out.push(y);
        }
        for (sign, clad, edge) in [(-1.0, &profile.left, -self.half_core), (1.0, &profile.right, self.half_core)] {
            if let Cladding::Periodic { cell, repeats } = clad {
                let mut d = 0.0;
                for _ in 0..*repeats {
                    for l in cell {
                        d += l.thickness_nm;
                        out.push(edge + sign * d);
                    }
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn cladding_state(&self, term: &Termination, clad: &Cladding, d: f64) -> [f64; 2] {
        match clad {
            Cladding::Homogeneous { .. } => {
                let f = (-term.gamma * d).exp();
                [term.state[0] * f, term.state[1] * f]
            }
            Cladding::Periodic { cell, .. } => {
                let period: f64 = cell.iter().map(|l| l.thickness_nm).sum();
                let m = (d / period).floor();
                let mut r = d - m * period;
                let scale = term.mu.powi(m as i32);
                let mut s = term.state;
                for l in cell.iter().filter(|l| l.thickness_nm > 0.0) {
                    if r <= l.thickness_nm {
                        s = layer_matrix_real(l.index, r, self.n_eff, self.k0, self.pol).apply(s);
                        return [s[0] * scale, s[1] * scale];
                    }
                    s = layer_matrix_real(l.index, l.thickness_nm, self.n_eff, self.k0, self.pol).apply(s);
                    r -= l.thickness_nm;
                }
                [s[0] * scale, s[1] * scale]
            }
        }
    }

    /// Unnormalised `(u, p·u')` at `y_nm` in the physical frame.
    pub fn state_at(&self, y_nm: f64) -> [f64; 2] {
        if y_nm < -self.half_core {
            let s = self.cladding_state(&self.left.0, &self.left.1, -self.half_core - y_nm);
            return [s[0], -s[1]];
        }
        if y_nm > self.half_core {
            let s = self.cladding_state(&self.right.0, &self.right.1, y_nm - self.half_core);
            return [s[0] * self.right_scale, s[1] * self.right_scale];
        }
        let idx = self
            .inner
            .partition_point(|(_, start, _)| *start <= y_nm)
            .saturating_sub(1);
        match self.inner.get(idx) {
            Some((layer, start, s)) => {
                layer_matrix_real(layer.index, y_nm - start, self.n_eff, self.k0, self.pol).apply(*s)
            }
            // No inner layers: the two claddings touch at y = 0.
            None => {
                let s = self.left.0.state;
                [s[0], -s[1]]
            }
        }
    }
}

/// Samples and normalises the field of the mode at `n_eff` on `grid`.
/// The sign is fixed so that the largest-magnitude sample is positive.
pub fn field_profile(profile: &IndexProfile, n_eff: f64, grid: FieldGrid) -> Result<ModeField> {
    let eval = FieldEvaluator::new(profile, n_eff).ok_or_else(|| {
        Error::ModeNotFound(format!("n_eff = {n_eff} is not in a confining region of the claddings"))
    })?;
    let mut values: Vec<f64> = grid.positions_nm().map(|y| eval.state_at(y)[0]).collect();
    let norm = (values.iter().map(|u| u * u).sum::<f64>() * grid.step_um()).sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::ModeNotFound(format!(
            "field of mode n_eff = {n_eff} cannot be normalised"
        )));
    }
    let peak = values
        .iter()
        .copied()
        .fold(0.0_f64, |m, u| if u.abs() > m.abs() { u } else { m });
    let scale = peak.signum() / norm;
    values.iter_mut().for_each(|u| *u *= scale);
    Ok(ModeField { grid, values })
}

fn bisect(profile: &IndexProfile, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        if b - a <= BISECTION_TOLERANCE {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = dispersion_function(profile, m);
        if fm == 0.0 {
            return m;
        }
        if fm.is_nan() {
            break;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// All roots of the dispersion function in `[lo, hi]` scanned at `step`.
pub(crate) fn roots_in(profile: &IndexProfile, lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).ceil().max(1.0) as usize;
    let mut roots = Vec::new();
    let mut prev = (lo, dispersion_function(profile, lo));
    for k in 1..=n {
        let x = if k == n { hi } else { lo + k as f64 * step };
        let fx = dispersion_function(profile, x);
        let (xa, fa) = prev;
        if fa.is_finite() && fx.is_finite() {
            if fa == 0.0 {
                roots.push(xa);
            } else if fa.signum() != fx.signum() && fx != 0.0 {
                let r = bisect(profile, xa, x, fa);
                let fr = dispersion_function(profile, r).abs();
                // Reject sign flips that are jumps rather than zeros.
                if fr <= 1e-6 * fa.abs().max(fx.abs()) {
                    roots.push(r);
                }
            }
        }
        prev = (x, fx);
    }
    if let Some(&(x, f)) = Some(&prev) {
        if f == 0.0 {
            roots.push(x);
        }
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    roots
}

/// Default n_eff search window for a profile.
pub fn default_search_range(profile: &IndexProfile) -> (f64, f64) {
    ((profile.min_index() - 0.6).max(1.0), profile.max_index())
}

pub(crate) fn build_mode(profile: &IndexProfile, n_eff: f64, grid: FieldGrid) -> Result<GuidedMode> {
    let field = field_profile(profile, n_eff, grid)?;
    let half = profile.core_thickness_nm() / 2.0;
    let core_fraction = field
        .grid
        .positions_nm()
        .zip(&field.values)
        .filter(|(y, _)| y.abs() <= half)
        .map(|(_, u)| u * u)
        .sum::<f64>()
        * field.grid.step_um();
    Ok(GuidedMode {
        pol: profile.pol,
        class: profile.classify(n_eff),
        n_eff,
        lambda_nm: profile.lambda_nm,
        beta: 2.0 * std::f64::consts::PI * n_eff / (profile.lambda_nm * 1e-3),
        core_fraction,
        field,
    })
}

/// Finds all guided modes with n_eff in `[lo, hi]`, sorted by descending n_eff,
/// sampled on the default grid.
pub fn find_modes(profile: &IndexProfile, range: (f64, f64)) -> Result<Vec<GuidedMode>> {
    find_modes_in(profile, range, DEFAULT_GRID_STEP_NM)
}

pub fn find_modes_in(profile: &IndexProfile, range: (f64, f64), grid_step_nm: f64) -> Result<Vec<GuidedMode>> {
    let (lo, hi) = range;
    if !(lo < hi) {
        return Err(Error::InvalidInput(format!("empty n_eff range [{lo}, {hi}]")));
    }
    if !(lo > 0.0) {
        return Err(Error::InvalidInput(format!("n_eff range must be positive, got [{lo}, {hi}]")));
    }
    let grid = FieldGrid::for_profile(profile, grid_step_nm);
    let mut modes = roots_in(profile, lo, hi, SCAN_STEP)
        .into_iter()
        .map(|n| build_mode(profile, n, grid))
        .collect::<Result<Vec<_>>>()?;
    modes.sort_by(|a, b| b.n_eff.total_cmp(&a.n_eff));
    Ok(modes)
}

/// The mode of the requested class with the largest core fraction.
pub fn select_mode(profile: &IndexProfile, class: ModeClass, grid_step_nm: f64) -> Result<GuidedMode> {
    find_modes_in(profile, default_search_range(profile), grid_step_nm)?
        .into_iter()
        .filter(|m| m.class == class)
        .max_by(|a, b| a.core_fraction.total_cmp(&b.core_fraction))
        .ok_or_else(|| {
            Error::ModeNotFound(format!(
                "no {class} {} mode at {} nm",
                profile.pol, profile.lambda_nm
            ))
        })
}

/// Nearest root to `guess` within `max_jump`, searching outward in growing windows.
pub(crate) fn nearest_root(profile: &IndexProfile, guess: f64, max_jump: f64) -> Option<f64> {
    let mut w: f64 = 2e-4;
    loop {
        let w_eff = w.min(max_jump);
        let step = (w_eff / 10.0).min(SCAN_STEP);
        let found = roots_in(profile, guess - w_eff, guess + w_eff, step)
            .into_iter()
            .min_by(|a, b| (a - guess).abs().total_cmp(&(b - guess).abs()));
        if found.is_some() || w_eff >= max_jump {
            return found;
        }
        w *= 4.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_symmetric() {
        let p = IndexProfile::symmetric_slab(2.2, 2.4, 500.0, 1550.0, Polarization::TE);
        let g = FieldGrid::for_profile(&p, 2.0);
        assert_eq!(g.len % 2, 1);
        assert_eq!(g.position_nm(0), -g.position_nm(g.len - 1));
        assert_eq!(g.position_nm(g.len / 2), 0.0);
    }

    #[test]
    fn empty_range_is_rejected() {
        let p = IndexProfile::symmetric_slab(2.2, 2.4, 500.0, 1550.0, Polarization::TE);
        assert!(find_modes(&p, (2.3, 2.2)).is_err());
    }

    #[test]
    fn no_modes_is_not_an_error() {
        let p = IndexProfile::symmetric_slab(2.2, 2.4, 500.0, 1550.0, Polarization::TE);
        assert!(find_modes(&p, (2.21, 2.215)).unwrap().is_empty());
    }
}
