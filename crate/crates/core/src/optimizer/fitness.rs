// SPDX-License-Identifier: Apache-2.0

use serde::Serialize;

use super::config::{GAConfig, TargetMode, Weights};
use super::Genes;
use crate::material::MaterialModel;
use crate::modesolver::{LayerStack, Waveguide};
use crate::schmidt::{build_jsa, schmidt_number, schmidt_spectrum, Builder};
use crate::spdc::{
    bandwidth_rad_s_to_nm, compute_jsa_linear, mode_overlap, optimal_pump_bandwidth, GridSpec,
    GroupIndices, Interaction, ProcessSpec, PumpSpec,
};
use crate::SPEED_OF_LIGHT;

/// Fitness of every infeasible candidate.
pub const PENALTY: f64 = 1e12;
/// Feasible fitness is capped here so it always stays below [`PENALTY`].
const FEASIBLE_CAP: f64 = 1e11;
/// Accepted poling periods.
pub const QPM_PERIOD_RANGE_UM: [f64; 2] = [2.0, 50.0];
/// Pump bandwidth used when no symmetric separability point exists, in units
/// of c/(|ΔN|·L) with ΔN the largest pump–photon group-index difference.
const FALLBACK_BANDWIDTH: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub qpm_period_um: f64,
    pub group_indices: GroupIndices,
    pub gvm_residual: f64,
    pub overlap_percent: f64,
    pub pump_bandwidth_nm: f64,
    /// From the linear builder.
    pub schmidt_number: f64,
    /// From the full builder; only for re-scored winners.
    pub schmidt_number_full: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub fitness: f64,
    pub feasible: bool,
    pub metrics: Option<Metrics>,
}

impl Evaluation {
    pub fn infeasible() -> Self {
        Evaluation {
            fitness: PENALTY,
            feasible: false,
            metrics: None,
        }
    }
}

/// `w_gvm·r² + w_overlap·(1 − Γ̂) + w_K·(K − 1)`.
pub fn objective(weights: &Weights, gvm_residual: f64, overlap_normalized: f64, k: f64) -> f64 {
    weights.gvm * gvm_residual * gvm_residual + weights.overlap * (1.0 - overlap_normalized) + weights.k * (k - 1.0)
}

pub fn gvm_residual(target: TargetMode, g: &GroupIndices) -> f64 {
    match target {
        TargetMode::EqualSpectra => g.pump - 0.5 * (g.signal + g.idler),
        TargetMode::UnequalSpectra => g.pump - g.signal,
    }
}

fn metrics(genes: &Genes, config: &GAConfig, material: &std::sync::Arc<MaterialModel>, full: bool) -> crate::Result<Metrics> {
    let stack = LayerStack {
        t_c: genes[0],
        t_1: genes[1],
        t_2: genes[2],
        x_c: genes[3],
        x_1: genes[4],
        x_2: genes[5],
        qpm_period_um: None,
        length_mm: config.length_mm,
        n_bilayers: config.n_bilayers,
    };
    let waveguide = Waveguide::new(stack, material.clone())?;
    let process = ProcessSpec::type_ii(config.signal_nm, config.idler_nm, config.length_mm);
    let (interaction, modes) = Interaction::from_waveguide(&waveguide, &process)?;
    let period = interaction.qpm_period_um.expect("derived period");
    let g = interaction.group_indices()?;
    let overlap = mode_overlap(&modes.pump.field, &modes.signal.field, &modes.idler.field)?;

    let bandwidth = optimal_pump_bandwidth(g.pump, g.signal, g.idler, config.length_mm).unwrap_or_else(|_| {
        let spread = (g.pump - g.idler).abs().max((g.pump - g.signal).abs());
        FALLBACK_BANDWIDTH * SPEED_OF_LIGHT / (spread * config.length_mm * 1e-3)
    });
    let pump = PumpSpec::new(process.pump_nm(), bandwidth)?;
    let grid = GridSpec::square(config.grid_points);
    let k = schmidt_number(&schmidt_spectrum(&compute_jsa_linear(&g, config.length_mm, &pump, &grid)?)?)?;
    let k_full = if full {
        Some(schmidt_number(&schmidt_spectrum(&build_jsa(&interaction, &pump, Builder::Full, &grid)?)?)?)
    } else {
        None
    };
    Ok(Metrics {
        qpm_period_um: period,
        group_indices: g,
        gvm_residual: gvm_residual(config.target, &g),
        overlap_percent: overlap.percent,
        pump_bandwidth_nm: bandwidth_rad_s_to_nm(pump.lambda_nm, bandwidth),
        schmidt_number: k,
        schmidt_number_full: k_full,
    })
}

/// Scores one gene vector. Missing modes, failed tracking or a poling period
/// outside [`QPM_PERIOD_RANGE_UM`] make the candidate infeasible.
pub fn evaluate_fitness(
    genes: &Genes,
    config: &GAConfig,
    material: &std::sync::Arc<MaterialModel>,
    full: bool,
) -> Evaluation {
    let m = match metrics(genes, config, material, full) {
        Ok(m) => m,
        Err(e) => {
            log::trace!("infeasible candidate {genes:?}: {e}");
            return Evaluation::infeasible();
        }
    };
    let [lo, hi] = QPM_PERIOD_RANGE_UM;
    if !(lo..=hi).contains(&m.qpm_period_um) {
        return Evaluation {
            metrics: Some(m),
            ..Evaluation::infeasible()
        };
    }
    let overlap = (m.overlap_percent / 100.0).clamp(0.0, 1.0);
    let fitness = objective(&config.weights, m.gvm_residual, overlap, m.schmidt_number);
    if !fitness.is_finite() {
        return Evaluation::infeasible();
    }
    Evaluation {
        fitness: fitness.min(FEASIBLE_CAP),
        feasible: true,
        metrics: Some(m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_candidate_scores_zero() {
        assert_eq!(objective(&Weights::default(), 0.0, 1.0, 1.0), 0.0);
        assert!(objective(&Weights::default(), 0.01, 0.5, 1.2) > 0.0);
    }

    #[test]
    fn residual_follows_target() {
        let g = GroupIndices { pump: 2.27, signal: 2.35, idler: 2.19 };
        assert!(gvm_residual(TargetMode::EqualSpectra, &g).abs() < 1e-12);
        assert!((gvm_residual(TargetMode::UnequalSpectra, &g) + 0.08).abs() < 1e-12);
    }
}
