// SPDX-License-Identifier: Apache-2.0

//! Real-coded genetic algorithm over layer thicknesses and Al fractions.
//!
//! Genes are `[t_c, t_1, t_2, x_c, x_1, x_2]`. The poling period is derived
//! for each candidate and the bilayer count is fixed. Lower fitness is better.

mod config;
mod fitness;

pub use config::{Bounds, GAConfig, TargetMode, Weights, GENE_NAMES, N_GENES};
pub use fitness::{evaluate_fitness, gvm_residual, objective, Evaluation, Metrics, PENALTY, QPM_PERIOD_RANGE_UM};

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::material::MaterialModel;
use crate::modesolver::LayerStack;

/// Fresh initial populations drawn before giving up on an all-infeasible start.
pub const MAX_RESEEDS: usize = 5;

pub type Genes = [f64; N_GENES];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub genes: Genes,
    pub fitness: f64,
    pub feasible: bool,
    pub metrics: Option<Metrics>,
}

impl Candidate {
    /// Structure file content for this candidate.
    pub fn to_stack(&self, config: &GAConfig) -> LayerStack {
        let g = &self.genes;
        LayerStack {
            t_c: g[0],
            t_1: g[1],
            t_2: g[2],
            x_c: g[3],
            x_1: g[4],
            x_2: g[5],
            qpm_period_um: self.metrics.as_ref().map(|m| m.qpm_period_um),
            length_mm: config.length_mm,
            n_bilayers: config.n_bilayers,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_fitness: f64,
    /// Mean over feasible candidates; NaN when none is feasible.
    pub mean_fitness: f64,
    pub feasible: usize,
    pub best_genes: Genes,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaOutcome {
    /// Best distinct candidates, best first.
    pub ranked: Vec<Candidate>,
    pub log: Vec<GenerationRecord>,
}

impl GaOutcome {
    /// Tab-separated generation log.
    pub fn log_table(&self) -> String {
        let mut out = String::from("generation\tbest_fitness\tmean_fitness\tfeasible\tt_c_nm\tt_1_nm\tt_2_nm\tx_c\tx_1\tx_2\n");
        for r in &self.log {
            out.push_str(&format!("{}\t{:.12e}\t{:.12e}\t{}", r.generation, r.best_fitness, r.mean_fitness, r.feasible));
            for g in r.best_genes {
                out.push_str(&format!("\t{g:.9}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Deterministic per-(generation, slot) random stream derived from the seed.
/// Streams `0..=MAX_RESEEDS` serve the initial draws; generation `g` uses
/// `MAX_RESEEDS + g`.
fn stream(seed: u64, generation: usize, slot: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((generation as u64) << 32) | slot as u64);
    rng
}

fn random_genes(bounds: &Bounds, rng: &mut impl Rng) -> Genes {
    let mut g = [0.0; N_GENES];
    for (k, [lo, hi]) in bounds.as_array().into_iter().enumerate() {
        g[k] = if hi > lo { rng.random_range(lo..=hi) } else { lo };
    }
    g
}

fn tournament<'a>(pop: &'a [Candidate], size: usize, rng: &mut impl Rng) -> &'a Candidate {
    (0..size.max(1))
        .map(|_| &pop[rng.random_range(0..pop.len())])
        .min_by(|a, b| a.fitness.total_cmp(&b.fitness))
        .expect("tournament size at least one")
}

/// Blend crossover (BLX-0.5) followed by Gaussian mutation, clamped to bounds.
fn offspring(a: &Genes, b: &Genes, config: &GAConfig, rng: &mut impl Rng) -> Genes {
    let bounds = config.bounds.as_array();
    let mut child = *a;
    if rng.random::<f64>() < config.crossover_rate {
        for k in 0..N_GENES {
            let (lo, hi) = (a[k].min(b[k]), a[k].max(b[k]));
            let d = 0.5 * (hi - lo);
            child[k] = if hi - lo > 0.0 { rng.random_range(lo - d..=hi + d) } else { lo };
        }
    }
    for k in 0..N_GENES {
        let [lo, hi] = bounds[k];
        if rng.random::<f64>() < config.mutation_rate && hi > lo {
            let normal = Normal::new(0.0, config.mutation_sigma * (hi - lo)).expect("finite sigma");
            child[k] += normal.sample(rng);
        }
        child[k] = child[k].clamp(lo, hi);
    }
    child
}

fn evaluate_all<F>(genes: Vec<Genes>, evaluate: &F) -> Vec<Candidate>
where
    F: Fn(&Genes) -> Evaluation + Sync,
{
    genes
        .into_par_iter()
        .map(|g| {
            let e = evaluate(&g);
            Candidate {
                genes: g,
                fitness: e.fitness,
                feasible: e.feasible,
                metrics: e.metrics,
            }
        })
        .collect()
}

fn sort_population(pop: &mut [Candidate]) {
    // Stable, so ties keep their slot order and runs stay reproducible.
    pop.sort_by(|a, b| a.fitness.total_cmp(&b.fitness));
}

fn record(generation: usize, pop: &[Candidate]) -> GenerationRecord {
    let feasible: Vec<f64> = pop.iter().filter(|c| c.feasible).map(|c| c.fitness).collect();
    GenerationRecord {
        generation,
        best_fitness: pop[0].fitness,
        mean_fitness: if feasible.is_empty() {
            f64::NAN
        } else {
            feasible.iter().sum::<f64>() / feasible.len() as f64
        },
        feasible: feasible.len(),
        best_genes: pop[0].genes,
    }
}

/// Runs the GA with an arbitrary objective. `evaluate` must be deterministic.
pub fn run_ga_with<F>(config: &GAConfig, evaluate: F) -> Result<GaOutcome>
where
    F: Fn(&Genes) -> Evaluation + Sync,
{
    config.validate()?;
    let mut pop = Vec::new();
    for attempt in 0..=MAX_RESEEDS {
        let genes = (0..config.population)
            .map(|slot| random_genes(&config.bounds, &mut stream(config.seed, attempt, slot)))
            .collect();
        pop = evaluate_all(genes, &evaluate);
        if pop.iter().any(|c| c.feasible) {
            break;
        }
        if attempt == MAX_RESEEDS {
            return Err(Error::Initialization(format!(
                "all {} candidates infeasible after {MAX_RESEEDS} reseeds",
                config.population
            )));
        }
        log::warn!("initial population entirely infeasible; reseeding ({})", attempt + 1);
    }
    sort_population(&mut pop);
    let mut log = vec![record(0, &pop)];

    for generation in 1..=config.generations {
        let children: Vec<Genes> = (config.elitism..config.population)
            .map(|slot| {
                let mut rng = stream(config.seed, MAX_RESEEDS + generation, slot);
                let a = tournament(&pop, config.tournament_size, &mut rng);
                let b = tournament(&pop, config.tournament_size, &mut rng);
                offspring(&a.genes, &b.genes, config, &mut rng)
            })
            .collect();
        let mut next: Vec<Candidate> = pop[..config.elitism].to_vec();
        next.extend(evaluate_all(children, &evaluate));
        sort_population(&mut next);
        pop = next;
        let r = record(generation, &pop);
        log::debug!("generation {generation}: best {:.6e}, feasible {}", r.best_fitness, r.feasible);
        log.push(r);
    }

    let mut ranked: Vec<Candidate> = Vec::new();
    for c in pop {
        if ranked.len() == config.top_k {
            break;
        }
        if !ranked.iter().any(|r| r.genes == c.genes) {
            ranked.push(c);
        }
    }
    Ok(GaOutcome { ranked, log })
}

/// Runs the GA on the waveguide objective. The ranked winners are re-scored
/// with the full-dispersion JSA builder.
pub fn run_ga(config: &GAConfig, material: Arc<MaterialModel>) -> Result<GaOutcome> {
    config.validate()?;
    let mut outcome = run_ga_with(config, |g| evaluate_fitness(g, config, &material, false))?;
    outcome.ranked = outcome
        .ranked
        .into_par_iter()
        .map(|c| {
            if !c.feasible {
                return c;
            }
            let e = evaluate_fitness(&c.genes, config, &material, true);
            Candidate {
                metrics: e.metrics.or(c.metrics),
                ..c
            }
        })
        .collect();
    Ok(outcome)
}
