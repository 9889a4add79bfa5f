// SPDX-License-Identifier: Apache-2.0

//! Frequency entanglement of a joint spectral amplitude.
//!
//! The Schmidt decomposition is the SVD of `Φ·√(ΔΩ_s ΔΩ_i)`, so the eigenvalues
//! `λₙ = σₙ²` do not depend on grid density. The Schmidt number is
//! `K = 1/Σλₙ²`, the purity `P = 1/K` and the entropy `E = −Σλₙ log₂ λₙ` (bits).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spdc::{
    compute_jsa_full, compute_jsa_linear, GridSpec, Interaction, JointSpectralAmplitude, PumpSpec,
};
use crate::{omega_from_wavelength_nm, wavelength_nm_from_omega};

/// Eigenvalues below this are dropped before computing the entropy.
pub const EIGENVALUE_FLOOR: f64 = 1e-12;
/// Allowed deviation of Σλₙ from one.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;
/// |ρ| below this counts as uncorrelated.
pub const CORRELATION_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct SchmidtResult {
    /// All eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Columns are Uₙ(Ω_s), orthonormal under ΣΔΩ_s.
    pub signal_modes: DMatrix<Complex64>,
    /// Columns are Vₙ(Ω_i), orthonormal under ΣΔΩ_i.
    pub idler_modes: DMatrix<Complex64>,
    pub schmidt_number: f64,
    pub purity: f64,
    pub entropy: f64,
    /// Grid L² norm of Φ − Σ√λₙUₙVₙ over the returned modes.
    pub residual: f64,
}

fn check_normalized(eigenvalues: &[f64]) -> Result<()> {
    let sum: f64 = eigenvalues.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE || eigenvalues.iter().any(|l| *l < -NORMALIZATION_TOLERANCE) {
        return Err(Error::Normalization(format!("Schmidt eigenvalues sum to {sum}")));
    }
    Ok(())
}

fn weighted(jsa: &JointSpectralAmplitude) -> DMatrix<Complex64> {
    let w = (jsa.d_omega_s() * jsa.d_omega_i()).sqrt();
    jsa.amplitude.map(|z| z * w)
}

/// Eigenvalues only; cheaper than the full decomposition.
pub fn schmidt_spectrum(jsa: &JointSpectralAmplitude) -> Result<Vec<f64>> {
    let mut eigenvalues: Vec<f64> = weighted(jsa).singular_values().iter().map(|s| s * s).collect();
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    check_normalized(&eigenvalues)?;
    Ok(eigenvalues)
}

pub fn schmidt_decompose(jsa: &JointSpectralAmplitude, n_modes: usize) -> Result<SchmidtResult> {
    let (ns, ni) = jsa.amplitude.shape();
    if n_modes == 0 || n_modes > ns.min(ni) {
        return Err(Error::InvalidInput(format!(
            "n_modes = {n_modes} must lie in [1, {}]",
            ns.min(ni)
        )));
    }
    let svd = weighted(jsa).svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let sigma = svd.singular_values;

    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| sigma[k] * sigma[k]).collect();
    check_normalized(&eigenvalues)?;

    let (ds, di) = (jsa.d_omega_s(), jsa.d_omega_i());
    let signal_modes = DMatrix::from_fn(ns, n_modes, |r, n| u[(r, order[n])] / ds.sqrt());
    let idler_modes = DMatrix::from_fn(ni, n_modes, |c, n| v_t[(order[n], c)] / di.sqrt());

    let mut rebuilt = DMatrix::<Complex64>::zeros(ns, ni);
    for n in 0..n_modes {
        let a = Complex64::from(eigenvalues[n].sqrt());
        rebuilt += signal_modes.column(n) * idler_modes.column(n).transpose() * a;
    }
    let residual = ((&jsa.amplitude - rebuilt).norm_squared() * ds * di).sqrt();

    let schmidt_number = schmidt_number(&eigenvalues)?;
    Ok(SchmidtResult {
        entropy: entropy(&eigenvalues)?,
        purity: 1.0 / schmidt_number,
        schmidt_number,
        eigenvalues,
        signal_modes,
        idler_modes,
        residual,
    })
}

/// K = 1/Σλₙ².
pub fn schmidt_number(eigenvalues: &[f64]) -> Result<f64> {
    check_normalized(eigenvalues)?;
    Ok(1.0 / eigenvalues.iter().map(|l| l * l).sum::<f64>())
}

/// E = −Σλₙ log₂ λₙ in bits, ignoring λₙ below [`EIGENVALUE_FLOOR`].
pub fn entropy(eigenvalues: &[f64]) -> Result<f64> {
    check_normalized(eigenvalues)?;
    Ok(-eigenvalues
        .iter()
        .filter(|&&l| l >= EIGENVALUE_FLOOR)
        .map(|l| l * l.log2())
        .sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Photon {
    Signal,
    Idler,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalWidth {
    pub fwhm_nm: f64,
    pub fwhm_rad_s: f64,
    /// The marginal has more than one half-maximum interval; the widest is reported.
    pub multi_peak: bool,
    /// The half-maximum interval reaches the edge of the grid.
    pub truncated: bool,
}

/// FWHM of the marginal spectrum of one photon, with edges found by linear
/// interpolation and converted exactly to a wavelength interval.
pub fn marginal_bandwidth(jsa: &JointSpectralAmplitude, which: Photon) -> Result<MarginalWidth> {
    let (density, axis, lambda0) = match which {
        Photon::Signal => (jsa.marginal_signal(), &jsa.omega_s, jsa.lambda_s_nm),
        Photon::Idler => (jsa.marginal_idler(), &jsa.omega_i, jsa.lambda_i_nm),
    };
    let peak = density.iter().cloned().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::Normalization("marginal spectrum is identically zero".into()));
    }
    let half = peak / 2.0;
    let above: Vec<bool> = density.iter().map(|d| *d >= half).collect();
    let mut intervals = Vec::new();
    let mut k = 0;
    while k < above.len() {
        if above[k] {
            let start = k;
            while k + 1 < above.len() && above[k + 1] {
                k += 1;
            }
            intervals.push((start, k));
        }
        k += 1;
    }
    let crossing = |a: usize, b: usize| {
        let t = (half - density[a]) / (density[b] - density[a]);
        axis[a] + t * (axis[b] - axis[a])
    };
    let n = density.len();
    let mut best: Option<(f64, f64, bool)> = None;
    for &(a, b) in &intervals {
        let lo = if a == 0 { axis[0] } else { crossing(a - 1, a) };
        let hi = if b == n - 1 { axis[n - 1] } else { crossing(b, b + 1) };
        let edge = a == 0 || b == n - 1;
        if best.is_none_or(|(l, h, _)| hi - lo > h - l) {
            best = Some((lo, hi, edge));
        }
    }
    let (lo, hi, truncated) = best.expect("peak lies in some interval");
    let w0 = omega_from_wavelength_nm(lambda0);
    let fwhm_nm = wavelength_nm_from_omega(w0 + lo) - wavelength_nm_from_omega(w0 + hi);
    let multi_peak = intervals.len() > 1;
    if multi_peak {
        log::warn!("{which:?} marginal has {} half-maximum intervals; reporting the widest", intervals.len());
    }
    Ok(MarginalWidth {
        fwhm_nm,
        fwhm_rad_s: hi - lo,
        multi_peak,
        truncated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Correlation {
    Anticorrelated,
    Uncorrelated,
    Correlated,
}

impl std::fmt::Display for Correlation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Correlation::Anticorrelated => "anticorrelated",
            Correlation::Uncorrelated => "uncorrelated",
            Correlation::Correlated => "correlated",
        })
    }
}

/// Pearson correlation of Ω_s and Ω_i under the density |Φ|², and its class.
pub fn correlation_sign(jsa: &JointSpectralAmplitude) -> (Correlation, f64) {
    let (mut m, mut ms, mut mi) = (0.0, 0.0, 0.0);
    let (mut ss, mut ii, mut si) = (0.0, 0.0, 0.0);
    for (r, ws) in jsa.omega_s.iter().enumerate() {
        for (c, wi) in jsa.omega_i.iter().enumerate() {
            let p = jsa.amplitude[(r, c)].norm_sqr();
            m += p;
            ms += p * ws;
            mi += p * wi;
            ss += p * ws * ws;
            ii += p * wi * wi;
            si += p * ws * wi;
        }
    }
    let (ms, mi) = (ms / m, mi / m);
    let var_s = ss / m - ms * ms;
    let var_i = ii / m - mi * mi;
    let rho = (si / m - ms * mi) / (var_s * var_i).sqrt();
    let class = if rho.abs() < CORRELATION_THRESHOLD {
        Correlation::Uncorrelated
    } else if rho < 0.0 {
        Correlation::Anticorrelated
    } else {
        Correlation::Correlated
    };
    (class, rho)
}

/// Which JSA construction a sweep uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Builder {
    Full,
    Linear,
}

impl std::str::FromStr for Builder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Builder::Full),
            "linear" => Ok(Builder::Linear),
            other => Err(Error::InvalidInput(format!("unknown builder '{other}' (full or linear)"))),
        }
    }
}

/// Scalar summary of one JSA.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JsaSummary {
    pub schmidt_number: f64,
    pub purity: f64,
    pub entropy_bits: f64,
    pub rho: f64,
    pub correlation: Correlation,
    pub signal: MarginalWidth,
    pub idler: MarginalWidth,
}

pub fn summarize(jsa: &JointSpectralAmplitude) -> Result<JsaSummary> {
    let eig = schmidt_spectrum(jsa)?;
    let k = schmidt_number(&eig)?;
    let (correlation, rho) = correlation_sign(jsa);
    Ok(JsaSummary {
        schmidt_number: k,
        purity: 1.0 / k,
        entropy_bits: entropy(&eig)?,
        rho,
        correlation,
        signal: marginal_bandwidth(jsa, Photon::Signal)?,
        idler: marginal_bandwidth(jsa, Photon::Idler)?,
    })
}

/// JSA of an interaction at one pump bandwidth with either builder.
pub fn build_jsa(
    interaction: &Interaction,
    pump: &PumpSpec,
    builder: Builder,
    grid: &GridSpec,
) -> Result<JointSpectralAmplitude> {
    match builder {
        Builder::Full => compute_jsa_full(interaction, pump, grid),
        Builder::Linear => {
            let g = interaction.group_indices()?;
            let mut jsa = compute_jsa_linear(&g, interaction.length_mm, pump, grid)?;
            jsa.lambda_s_nm = interaction.signal.lambda0_nm();
            jsa.lambda_i_nm = interaction.idler.lambda0_nm();
            Ok(jsa)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub bandwidth_nm: f64,
    pub summary: JsaSummary,
}

/// One JSA and decomposition per pump bandwidth, evaluated in parallel.
pub fn sweep_pump_bandwidth(
    interaction: &Interaction,
    bandwidths_nm: &[f64],
    builder: Builder,
    grid: &GridSpec,
) -> Result<Vec<SweepRow>> {
    if bandwidths_nm.is_empty() {
        return Err(Error::InvalidInput("empty bandwidth list".into()));
    }
    let pump_nm = interaction.pump.lambda0_nm();
    let pumps = bandwidths_nm
        .iter()
        .map(|&b| PumpSpec::from_bandwidth_nm(pump_nm, b))
        .collect::<Result<Vec<_>>>()?;
    pumps
        .par_iter()
        .zip(bandwidths_nm)
        .map(|(pump, &bandwidth_nm)| {
            let jsa = build_jsa(interaction, pump, builder, grid)?;
            Ok(SweepRow {
                bandwidth_nm,
                summary: summarize(&jsa)?,
            })
        })
        .collect()
}

/// Tab-separated sweep table with unit-suffixed headers.
pub fn sweep_table(rows: &[SweepRow]) -> String {
    let mut out = String::from("pump_bandwidth_nm\tK\tentropy_bits\trho\tsignal_fwhm_nm\tidler_fwhm_nm\n");
    for r in rows {
        let s = &r.summary;
        out.push_str(&format!(
            "{:.6}\t{:.9}\t{:.9}\t{:.9}\t{:.6}\t{:.6}\n",
            r.bandwidth_nm, s.schmidt_number, s.entropy_bits, s.rho, s.signal.fwhm_nm, s.idler.fwhm_nm
        ));
    }
    out
}

/// Tab-separated `(n, λₙ)` table of the leading eigenvalues.
pub fn spectrum_table(eigenvalues: &[f64], max_rows: usize) -> String {
    let mut out = String::from("n\tlambda_n\n");
    for (n, l) in eigenvalues.iter().take(max_rows).enumerate() {
        out.push_str(&format!("{n}\t{l:.12e}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schmidt_number_arithmetic() {
        assert!((schmidt_number(&[1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((schmidt_number(&[0.5, 0.5]).unwrap() - 2.0).abs() < 1e-15);
        assert!((schmidt_number(&[0.7, 0.2, 0.1]).unwrap() - 1.0 / 0.54).abs() < 1e-12);
        assert!(schmidt_number(&[0.7, 0.2]).is_err());
    }

    #[test]
    fn entropy_arithmetic() {
        assert_eq!(entropy(&[1.0]).unwrap(), 0.0);
        assert!((entropy(&[0.5, 0.5]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(entropy(&[1.0 - 1e-13, 1e-13]).unwrap(), -((1.0 - 1e-13) * (1.0f64 - 1e-13).log2()));
    }

    #[test]
    fn builder_parses() {
        assert_eq!("full".parse::<Builder>().unwrap(), Builder::Full);
        assert!("quadratic".parse::<Builder>().is_err());
    }

    #[test]
    fn tables_have_unit_headers() {
        assert!(spectrum_table(&[0.9, 0.1], 5).starts_with("n\tlambda_n\n0\t"));
        assert!(sweep_table(&[]).starts_with("pump_bandwidth_nm\t"));
    }
}
