// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GroupIndices, Interaction, PumpSpec};
use crate::error::{Error, Result};
use crate::{omega_from_wavelength_nm, SPEED_OF_LIGHT};

pub const DEFAULT_GRID_POINTS: usize = 512;
/// Standard deviations of the pump amplitude, σ = Δω_p/√2, covered along Ω_s + Ω_i.
pub const PUMP_SIGMAS_IN_SPAN: f64 = 4.0;
/// Multiples of π covered by the sinc argument.
pub const LOBES_IN_SPAN: f64 = 4.0;

/// Frequency grid request. Missing half-spans are chosen automatically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points_s: usize,
    pub points_i: usize,
    /// rad/s.
    pub half_span_s: Option<f64>,
    pub half_span_i: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::square(DEFAULT_GRID_POINTS)
    }
}

/// Uniform, zero-centred detuning axes.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedGrid {
    pub omega_s: Vec<f64>,
    pub omega_i: Vec<f64>,
}

fn axis(half: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| -half + 2.0 * half * k as f64 / (n - 1) as f64)
        .collect()
}

impl GridSpec {
    pub fn square(points: usize) -> Self {
        GridSpec {
            points_s: points,
            points_i: points,
            half_span_s: None,
            half_span_i: None,
        }
    }

    pub fn with_spans(mut self, half_span_s: f64, half_span_i: f64) -> Self {
        self.half_span_s = Some(half_span_s);
        self.half_span_i = Some(half_span_i);
        self
    }

    /// Fixes the axes. Automatic spans bound the region where both the pump
    /// envelope (|Ω_s+Ω_i| ≤ 4σ) and the sinc (|argument| ≤ 4π) are significant.
    pub fn resolve(&self, g: &GroupIndices, length_mm: f64, pump: &PumpSpec) -> Result<ResolvedGrid> {
        if self.points_s < 2 || self.points_i < 2 {
            return Err(Error::InvalidInput(format!(
                "grid needs at least 2 points per axis, got {}×{}",
                self.points_s, self.points_i
            )));
        }
        let half_l = length_mm * 1e-3 / (2.0 * SPEED_OF_LIGHT);
        let a_s = (g.pump - g.signal) * half_l;
        let a_i = (g.pump - g.idler) * half_l;
        let sinc_reach = LOBES_IN_SPAN * std::f64::consts::PI;
        let pump_reach = PUMP_SIGMAS_IN_SPAN * pump.bandwidth / std::f64::consts::SQRT_2;
        let spread = (a_s - a_i).abs();
        let auto = |a_other: f64| -> Result<f64> {
            let half = (a_other.abs() * pump_reach + sinc_reach) / spread;
            if !(half.is_finite() && half > 0.0) {
                return Err(Error::InvalidInput(
                    "signal and idler group indices coincide; give explicit grid spans".into(),
                ));
            }
            Ok(half)
        };
        let half_s = match self.half_span_s {
            Some(h) => h,
            None => auto(a_i)?,
        };
        let half_i = match self.half_span_i {
            Some(h) => h,
            None => auto(a_s)?,
        };
        for h in [half_s, half_i] {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidInput(format!("grid half-span {h} rad/s")));
            }
        }
        Ok(ResolvedGrid {
            omega_s: axis(half_s, self.points_s),
            omega_i: axis(half_i, self.points_i),
        })
    }
}

/// Φ(Ω_s, Ω_i) sampled on uniform detuning axes; rows follow Ω_s.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpectralAmplitude {
    pub omega_s: Vec<f64>,
    pub omega_i: Vec<f64>,
    pub amplitude: DMatrix<Complex64>,
    /// Central wavelengths used when reporting in nm.
    pub lambda_s_nm: f64,
    pub lambda_i_nm: f64,
}

/// On-disk layout: two axis vectors and the real and imaginary planes,
/// each plane a list of rows indexed by Ω_s.
#[derive(Serialize, Deserialize)]
struct JsaFile {
    lambda_s_nm: f64,
    lambda_i_nm: f64,
    omega_s_rad_per_s: Vec<f64>,
    omega_i_rad_per_s: Vec<f64>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

impl JointSpectralAmplitude {
    pub fn d_omega_s(&self) -> f64 {
        self.omega_s[1] - self.omega_s[0]
    }

    pub fn d_omega_i(&self) -> f64 {
        self.omega_i[1] - self.omega_i[0]
    }

    /// ΣΣ|Φ|²ΔΩ_sΔΩ_i.
    pub fn norm_sq(&self) -> f64 {
        self.amplitude.norm_squared() * self.d_omega_s() * self.d_omega_i()
    }

    /// Wraps sampled amplitudes on uniform axes and normalizes them.
    pub fn from_samples(
        omega_s: Vec<f64>,
        omega_i: Vec<f64>,
        amplitude: DMatrix<Complex64>,
        lambda_s_nm: f64,
        lambda_i_nm: f64,
    ) -> Result<Self> {
        if omega_s.len() < 2 || omega_i.len() < 2 || amplitude.shape() != (omega_s.len(), omega_i.len()) {
            return Err(Error::InvalidInput(format!(
                "amplitude {:?} does not match axes of length {} and {}",
                amplitude.shape(),
                omega_s.len(),
                omega_i.len()
            )));
        }
        JointSpectralAmplitude {
            omega_s,
            omega_i,
            amplitude,
            lambda_s_nm,
            lambda_i_nm,
        }
        .normalized()
    }

    fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sq();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Normalization(format!(
                "joint spectral amplitude has norm {n}; the grid misses the phase-matched region"
            )));
        }
        self.amplitude /= Complex64::from(n.sqrt());
        Ok(self)
    }

    /// |Φ|² integrated over Ω_i, as a density in Ω_s.
    pub fn marginal_signal(&self) -> Vec<f64> {
        let d = self.d_omega_i();
        self.amplitude
            .row_iter()
            .map(|r| r.iter().map(|z| z.norm_sqr()).sum::<f64>() * d)
            .collect()
    }

    /// |Φ|² integrated over Ω_s, as a density in Ω_i.
    pub fn marginal_idler(&self) -> Vec<f64> {
        let d = self.d_omega_s();
        self.amplitude
            .column_iter()
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>() * d)
            .collect()
    }

    /// Exchanges the roles of signal and idler.
    pub fn transposed(&self) -> Self {
        JointSpectralAmplitude {
            omega_s: self.omega_i.clone(),
            omega_i: self.omega_s.clone(),
            amplitude: self.amplitude.transpose(),
            lambda_s_nm: self.lambda_i_nm,
            lambda_i_nm: self.lambda_s_nm,
        }
    }

    pub fn to_json(&self) -> String {
        let plane = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            self.amplitude
                .row_iter()
                .map(|r| r.iter().map(f).collect())
                .collect()
        };
        let file = JsaFile {
            lambda_s_nm: self.lambda_s_nm,
            lambda_i_nm: self.lambda_i_nm,
            omega_s_rad_per_s: self.omega_s.clone(),
            omega_i_rad_per_s: self.omega_i.clone(),
            re: plane(|z| z.re),
            im: plane(|z| z.im),
        };
        serde_json::to_string(&file).expect("JSA serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: JsaFile = serde_json::from_str(text).map_err(|e| Error::parse("JSA file", e))?;
        let (ns, ni) = (f.omega_s_rad_per_s.len(), f.omega_i_rad_per_s.len());
        if ns < 2 || ni < 2 {
            return Err(Error::parse("JSA file", "axes need at least 2 points"));
        }
        let shape_ok = |p: &Vec<Vec<f64>>| p.len() == ns && p.iter().all(|r| r.len() == ni);
        if !shape_ok(&f.re) || !shape_ok(&f.im) {
            return Err(Error::parse("JSA file", format!("planes must be {ns}×{ni}")));
        }
        let amplitude = DMatrix::from_fn(ns, ni, |r, c| Complex64::new(f.re[r][c], f.im[r][c]));
        Ok(JointSpectralAmplitude {
            omega_s: f.omega_s_rad_per_s,
            omega_i: f.omega_i_rad_per_s,
            amplitude,
            lambda_s_nm: f.lambda_s_nm,
            lambda_i_nm: f.lambda_i_nm,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Fills a matrix row-parallel from `f(row, col)`.
fn fill(ns: usize, ni: usize, f: impl Fn(usize, usize) -> Complex64 + Sync) -> DMatrix<Complex64> {
    let rows: Vec<Vec<Complex64>> = (0..ns)
        .into_par_iter()
        .map(|r| (0..ni).map(|c| f(r, c)).collect())
        .collect();
    DMatrix::from_fn(ns, ni, |r, c| rows[r][c])
}

/// First-order (group-index) JSA:
/// `E_p(Ω_s+Ω_i)·sinc([(N_p−N_s)Ω_s + (N_p−N_i)Ω_i]L/2c)·exp(i[(N_p+N_s)Ω_s + (N_p+N_i)Ω_i]L/2c)`,
/// normalized on the grid. Signal and idler are centred at twice the pump wavelength.
pub fn compute_jsa_linear(
    g: &GroupIndices,
    length_mm: f64,
    pump: &PumpSpec,
    grid: &GridSpec,
) -> Result<JointSpectralAmplitude> {
    if !(length_mm > 0.0) || ![g.pump, g.signal, g.idler].iter().all(|n| n.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "linear JSA needs finite group indices and L > 0 (L = {length_mm} mm)"
        )));
    }
    let axes = grid.resolve(g, length_mm, pump)?;
    let half_l = length_mm * 1e-3 / (2.0 * SPEED_OF_LIGHT);
    let amplitude = fill(axes.omega_s.len(), axes.omega_i.len(), |r, c| {
        let (ws, wi) = (axes.omega_s[r], axes.omega_i[c]);
        let arg = ((g.pump - g.signal) * ws + (g.pump - g.idler) * wi) * half_l;
        let phase = ((g.pump + g.signal) * ws + (g.pump + g.idler) * wi) * half_l;
        Complex64::from_polar(pump.envelope(ws + wi) * sinc(arg), phase)
    });
    JointSpectralAmplitude {
        omega_s: axes.omega_s,
        omega_i: axes.omega_i,
        amplitude,
        lambda_s_nm: 2.0 * pump.lambda_nm,
        lambda_i_nm: 2.0 * pump.lambda_nm,
    }
    .normalized()
}

/// Four-point Lagrange interpolation on a uniform lattice.
struct Lattice {
    start: f64,
    step: f64,
    values: Vec<f64>,
}

impl Lattice {
    fn at(&self, x: f64) -> f64 {
        let n = self.values.len();
        let t = (x - self.start) / self.step;
        let j = (t.floor() as isize).clamp(1, n as isize - 3) as usize;
        let u = t - j as f64;
        let y = &self.values[j - 1..j + 3];
        let (a, b, c, d) = (u + 1.0, u, u - 1.0, u - 2.0);
        -y[0] * b * c * d / 6.0 + y[1] * a * c * d / 2.0 - y[2] * a * b * d / 2.0 + y[3] * a * b * c / 6.0
    }
}

/// JSA with the full dispersion of each mode:
/// `E_p(Ω_s+Ω_i)·sinc((Δk−2π/Λ)L/2)·exp(i(s_k−s_k⁰)L/2)`, `s_k = β_p+β_s+β_i`.
///
/// β_s and β_i are solved at every axis point; β_p is solved on a lattice four
/// times denser than the combined axes and interpolated at Ω_s+Ω_i. The phase
/// is referenced to the centre, which only removes a global constant.
pub fn compute_jsa_full(
    interaction: &Interaction,
    pump: &PumpSpec,
    grid: &GridSpec,
) -> Result<JointSpectralAmplitude> {
    let pump_omega = omega_from_wavelength_nm(pump.lambda_nm);
    if (pump_omega / interaction.pump.omega0() - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidInput(format!(
            "pump spec at {} nm does not match the pump mode at {:.3} nm",
            pump.lambda_nm,
            interaction.pump.lambda0_nm()
        )));
    }
    let g = if grid.half_span_s.is_some() && grid.half_span_i.is_some() {
        // Spans are explicit; group indices are not needed.
        GroupIndices { pump: 0.0, signal: 0.0, idler: 1.0 }
    } else {
        interaction.group_indices()?
    };
    let axes = grid.resolve(&g, interaction.length_mm, pump)?;
    let beta_s = interaction.signal.beta_many(&axes.omega_s)?;
    let beta_i = interaction.idler.beta_many(&axes.omega_i)?;

    let (ws, wi) = (&axes.omega_s, &axes.omega_i);
    let lo = ws[0] + wi[0];
    let hi = ws[ws.len() - 1] + wi[wi.len() - 1];
    let n_lattice = 4 * (ws.len() + wi.len()) + 1;
    let step = (hi - lo) / (n_lattice - 1) as f64;
    let lattice_omegas: Vec<f64> = (0..n_lattice).map(|k| lo + step * k as f64).collect();
    let beta_p = Lattice {
        start: lo,
        step,
        values: interaction.pump.beta_many(&lattice_omegas)?,
    };

    let grating = interaction.grating_vector()?;
    let s0 = interaction.pump.beta(0.0)? + interaction.signal.beta(0.0)? + interaction.idler.beta(0.0)?;
    let half_len = interaction.length_um() / 2.0;
    let amplitude = fill(ws.len(), wi.len(), |r, c| {
        let bp = beta_p.at(ws[r] + wi[c]);
        let arg = (bp - beta_s[r] - beta_i[c] - grating) * half_len;
        let phase = (bp + beta_s[r] + beta_i[c] - s0) * half_len;
        Complex64::from_polar(pump.envelope(ws[r] + wi[c]) * sinc(arg), phase)
    });
    JointSpectralAmplitude {
        omega_s: axes.omega_s,
        omega_i: axes.omega_i,
        amplitude,
        lambda_s_nm: interaction.signal.lambda0_nm(),
        lambda_i_nm: interaction.idler.lambda0_nm(),
    }
    .normalized()
}
