//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use brw_core::modesolver::Polarization;
use brw_core::spdc::JointSpectralAmplitude;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Roots of the textbook symmetric slab equations
/// `tan(κd/2) = r·γ/κ` (even) and `-cot(κd/2) = r·γ/κ` (odd), with `r = 1` for TE
/// and `r = n_core²/n_clad²` for TM.
pub fn slab_oracle(clad: f64, core: f64, d_nm: f64, lambda_nm: f64, pol: Polarization) -> Vec<f64> {
    let k0 = 2.0 * std::f64::consts::PI / lambda_nm;
    let r = match pol {
        Polarization::TE => 1.0,
        Polarization::TM => core * core / (clad * clad),
    };
    let even = |n: f64| {
        let kappa = k0 * (core * core - n * n).sqrt();
        let gamma = k0 * (n * n - clad * clad).sqrt();
        // Multiplied through by cos to stay continuous.
        kappa * (kappa * d_nm / 2.0).sin() - r * gamma * (kappa * d_nm / 2.0).cos()
    };
    let odd = |n: f64| {
        let kappa = k0 * (core * core - n * n).sqrt();
        let gamma = k0 * (n * n - clad * clad).sqrt();
        kappa * (kappa * d_nm / 2.0).cos() + r * gamma * (kappa * d_nm / 2.0).sin()
    };
    let mut roots = Vec::new();
    let steps = 20_000;
    let (lo, hi) = (clad + 1e-12, core - 1e-12);
    for f in [&even as &dyn Fn(f64) -> f64, &odd] {
        for k in 0..steps {
            let mut a = lo + (hi - lo) * k as f64 / steps as f64;
            let mut b = lo + (hi - lo) * (k + 1) as f64 / steps as f64;
            let (mut fa, fb) = (f(a), f(b));
            if fa.signum() == fb.signum() {
                continue;
            }
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if fm.signum() == fa.signum() {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
    }
    roots.sort_by(|a, b| b.total_cmp(a));
    roots
}

/// exp(−a(x+y)² − b(x−y)²) sampled on a square grid wide enough for both widths.
pub fn double_gaussian(a: f64, b: f64, n: usize) -> JointSpectralAmplitude {
    let half = 7.0 / a.min(b).sqrt() / 2.0;
    let axis: Vec<f64> = (0..n).map(|k| -half + 2.0 * half * k as f64 / (n - 1) as f64).collect();
    let amp = DMatrix::from_fn(n, n, |r, c| {
        let (x, y) = (axis[r], axis[c]);
        Complex64::from((-a * (x + y).powi(2) - b * (x - y).powi(2)).exp())
    });
    JointSpectralAmplitude::from_samples(axis.clone(), axis, amp, 1550.0, 1550.0).unwrap()
}

/// Schmidt spectrum of the double Gaussian: λₙ = (1 − μ²)μ²ⁿ with
/// μ = |√a − √b|/(√a + √b); K = (a + b)/(2√(ab)).
pub fn gaussian_oracle(a: f64, b: f64, n: usize) -> (Vec<f64>, f64) {
    let mu = ((a.sqrt() - b.sqrt()) / (a.sqrt() + b.sqrt())).abs();
    let lambdas = (0..n).map(|k| (1.0 - mu * mu) * mu.powi(2 * k as i32)).collect();
    (lambdas, (a + b) / (2.0 * (a * b).sqrt()))
}
