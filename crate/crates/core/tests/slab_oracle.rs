// SPDX-License-Identifier: Apache-2.0

//! Transfer-matrix solver against the analytic symmetric-slab dispersion relation.

use brw_core::modesolver::{
    dispersion_function, field_profile, find_modes, transfer_matrix, Cladding, FieldEvaluator,
    FieldGrid, IndexProfile, Layer, Polarization,
};
mod common;

use common::slab_oracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn textbook_slab_matches_oracle() {
    for pol in [Polarization::TE, Polarization::TM] {
        let p = IndexProfile::symmetric_slab(2.2, 2.4, 500.0, 1550.0, pol);
        let modes = find_modes(&p, (2.2 + 1e-9, 2.4)).unwrap();
        let oracle = slab_oracle(2.2, 2.4, 500.0, 1550.0, pol);
        assert_eq!(modes.len(), oracle.len(), "{pol}");
        assert_eq!(modes.len(), 1, "500 nm slab at 1550 nm is single mode");
        for (m, o) in modes.iter().zip(&oracle) {
            assert!((m.n_eff - o).abs() < 1e-8, "{pol}: {} vs {o}", m.n_eff);
        }
    }
}

#[test]
fn randomized_slabs_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut cases = 0;
    let start = std::time::Instant::now();
    while cases < 24 {
        let clad = rng.random_range(1.4..2.4);
        let core = clad + rng.random_range(0.02..0.6);
        let d = rng.random_range(200.0..2500.0);
        let lambda = rng.random_range(700.0..1600.0);
        for pol in [Polarization::TE, Polarization::TM] {
            let p = IndexProfile::symmetric_slab(clad, core, d, lambda, pol);
            let oracle = slab_oracle(clad, core, d, lambda, pol);
            let modes = find_modes(&p, (clad + 1e-9, core)).unwrap();
            // Roots pressed against the cutoff can fall inside the first scan cell.
            let oracle: Vec<f64> = oracle.into_iter().filter(|n| *n > clad + 2e-4).collect();
            let found: Vec<f64> = modes.iter().map(|m| m.n_eff).filter(|n| *n > clad + 2e-4).collect();
            assert_eq!(found.len(), oracle.len(), "clad {clad} core {core} d {d} λ {lambda} {pol}");
            for (m, o) in found.iter().zip(&oracle) {
                assert!((m - o).abs() < 1e-8, "{m} vs {o}");
            }
        }
        cases += 1;
    }
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn fundamental_profile_matches_cosine_exponential() {
    let (clad, core, d, lambda) = (2.2, 2.4, 500.0, 1550.0);
    let p = IndexProfile::symmetric_slab(clad, core, d, lambda, Polarization::TE);
    let n = slab_oracle(clad, core, d, lambda, Polarization::TE)[0];
    let grid = FieldGrid::for_profile(&p, 1.0);
    let field = field_profile(&p, n, grid).unwrap();

    let k0 = 2.0 * std::f64::consts::PI / lambda;
    let kappa = k0 * (core * core - n * n).sqrt();
    let gamma = k0 * (n * n - clad * clad).sqrt();
    let analytic: Vec<f64> = grid
        .positions_nm()
        .map(|y| {
            if y.abs() <= d / 2.0 {
                (kappa * y).cos()
            } else {
                (kappa * d / 2.0).cos() * (-gamma * (y.abs() - d / 2.0)).exp()
            }
        })
        .collect();
    let norm = (analytic.iter().map(|u| u * u).sum::<f64>() * grid.step_um()).sqrt();
    for (u, a) in field.values.iter().zip(&analytic) {
        assert!((u - a / norm).abs() < 1e-6, "{u} vs {}", a / norm);
    }
    assert!((field.norm() - 1.0).abs() < 1e-9);
}

#[test]
fn zero_thickness_layer_is_transparent() {
    let with = IndexProfile {
        lambda_nm: 1300.0,
        pol: Polarization::TM,
        left: Cladding::Homogeneous { index: 2.0 },
        layers: vec![Layer::new(2.3, 300.0), Layer::new(2.9, 0.0), Layer::new(2.25, 420.0)],
        right: Cladding::Homogeneous { index: 2.1 },
    };
    let mut without = with.clone();
    without.layers.remove(1);
    for n in [1.5, 2.05, 2.2] {
        let a = transfer_matrix(&with, n);
        let b = transfer_matrix(&without, n);
        assert!((a - b).norm() < 1e-12);
        let (da, db) = (dispersion_function(&with, n), dispersion_function(&without, n));
        assert!(da.to_bits() == db.to_bits() || (da.is_nan() && db.is_nan()));
    }
}

#[test]
fn transfer_matrix_is_unimodular() {
    let p = IndexProfile {
        lambda_nm: 1550.0,
        pol: Polarization::TE,
        left: Cladding::Periodic { cell: vec![Layer::new(2.23, 463.0), Layer::new(2.12, 810.0)], repeats: 12 },
        layers: vec![Layer::new(2.2, 1037.0)],
        right: Cladding::Periodic { cell: vec![Layer::new(2.23, 463.0), Layer::new(2.12, 810.0)], repeats: 12 },
    };
    for pol in [Polarization::TE, Polarization::TM] {
        let p = IndexProfile { pol, ..p.clone() };
        for n in [1.9, 2.05, 2.15, 2.21, 2.3] {
            let m = transfer_matrix(&p, n);
            let det = m.determinant();
            // Rounding in the product grows with the entry magnitude.
            let tol = 1e-14 * m.norm_squared().max(1.0);
            assert!((det - 1.0).norm() < tol, "n = {n}: det = {det}, tol {tol}");
        }
    }
}

#[test]
fn tangential_fields_are_continuous_and_symmetric() {
    let cell = vec![Layer::new(2.23, 463.0), Layer::new(2.12, 810.0)];
    for pol in [Polarization::TE, Polarization::TM] {
        let p = IndexProfile {
            lambda_nm: 1550.0,
            pol,
            left: Cladding::Periodic { cell: cell.clone(), repeats: 12 },
            layers: vec![Layer::new(2.2, 1037.0)],
            right: Cladding::Periodic { cell: cell.clone(), repeats: 12 },
        };
        let modes = find_modes(&p, (1.8, 2.23)).unwrap();
        assert!(!modes.is_empty());
        for m in &modes {
            let eval = FieldEvaluator::new(&p, m.n_eff).unwrap();
            let scale = m.field.values.iter().fold(0.0_f64, |a, u| a.max(u.abs()));
            let raw_peak = m
                .field
                .grid
                .positions_nm()
                .map(|y| eval.state_at(y)[0].abs())
                .fold(0.0_f64, f64::max);
            for y in eval.interfaces(&p) {
                let (a, b) = (eval.state_at(y - 1e-9), eval.state_at(y + 1e-9));
                for c in 0..2 {
                    let tol = 1e-6 * raw_peak.max(a[c].abs()).max(1e-300) + 1e-6 * a[c].abs();
                    assert!((a[c] - b[c]).abs() <= tol.max(1e-6 * raw_peak), "{pol} n={} y={y}", m.n_eff);
                }
            }
            // Even or odd about the centre.
            let v = &m.field.values;
            let even = v.iter().zip(v.iter().rev()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let odd = v.iter().zip(v.iter().rev()).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
            assert!(even.min(odd) < 1e-8 * scale.max(1.0), "{pol} n={}: {even} {odd}", m.n_eff);
            assert!((m.field.norm() - 1.0).abs() < 1e-9);
        }
    }
}
