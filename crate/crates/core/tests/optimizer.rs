use std::sync::Arc;

use brw_core::material::{default_material_path, MaterialModel};
use brw_core::optimizer::{
    evaluate_fitness, run_ga, run_ga_with, Bounds, Evaluation, GAConfig, TargetMode, Weights, N_GENES,
};

fn material() -> Arc<MaterialModel> {
    Arc::new(MaterialModel::load(default_material_path()).unwrap())
}

const S1_GENES: [f64; N_GENES] = [1037.0, 463.0, 810.0, 0.57, 0.44, 0.88];
const S2_GENES: [f64; N_GENES] = [986.0, 430.0, 533.0, 0.56, 0.39, 0.65];

fn pinned(genes: &[f64; N_GENES]) -> Bounds {
    Bounds::around(genes, 0.0)
}

#[test]
fn one_gene_search_agrees_with_brute_force_scan() {
    let m = material();
    let mut bounds = pinned(&S1_GENES);
    bounds.x_1 = [0.40, 0.47];
    let config = GAConfig {
        seed: 5,
        population: 12,
        generations: 50,
        target: TargetMode::UnequalSpectra,
        weights: Weights { gvm: 1.0, overlap: 0.0, k: 0.0 },
        grid_points: 32,
        top_k: 1,
        ..GAConfig::with_bounds(bounds)
    };
    let residual = |x1: f64| {
        let mut g = S1_GENES;
        g[4] = x1;
        evaluate_fitness(&g, &config, &m, false).metrics.unwrap().gvm_residual
    };
    let oracle = (0..=140)
        .map(|k| residual(0.40 + 0.0005 * k as f64).abs())
        .fold(f64::INFINITY, f64::min);

    let outcome = run_ga_with(&config, |g| evaluate_fitness(g, &config, &m, false)).unwrap();
    let best = &outcome.ranked[0];
    let r = best.metrics.as_ref().unwrap().gvm_residual.abs();
    assert!(r < 1e-3, "GA residual {r}");
    assert!(r <= oracle + 1e-4, "GA residual {r} vs scan {oracle}");
    for k in [0, 1, 2, 3, 5] {
        assert_eq!(best.genes[k], S1_GENES[k]);
    }
}

#[test]
fn search_around_structure_two_finds_separable_designs() {
    let config = GAConfig {
        seed: 2,
        population: 12,
        generations: 4,
        target: TargetMode::EqualSpectra,
        top_k: 2,
        ..GAConfig::with_bounds(Bounds::around(&S2_GENES, 0.1))
    };
    let m = material();
    let a = run_ga(&config, m.clone()).unwrap();
    let best = a.ranked[0].metrics.as_ref().unwrap();
    assert!(best.schmidt_number < 1.5, "K {}", best.schmidt_number);
    assert!(best.schmidt_number_full.unwrap() < 1.5);
    let b = run_ga(&config, m).unwrap();
    assert_eq!(a.log_table(), b.log_table());
}

#[test]
fn infeasible_candidates_carry_the_penalty() {
    // A 500 nm pump lies outside the tabulated material range.
    let config = GAConfig { signal_nm: 1000.0, idler_nm: 1000.0, ..GAConfig::default() };
    let e = evaluate_fitness(&S1_GENES, &config, &material(), false);
    assert!(!e.feasible);
    assert_eq!(e.fitness, Evaluation::infeasible().fitness);
}
