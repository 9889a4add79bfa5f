// SPDX-License-Identifier: Apache-2.0

use nalgebra::Matrix2;
use num_complex::Complex64;

use super::{Cladding, IndexProfile, Layer, Polarization};

pub type Matrix2c = Matrix2<Complex64>;

fn weight(pol: Polarization, index: f64) -> f64 {
    match pol {
        Polarization::TE => 1.0,
        Polarization::TM => 1.0 / (index * index),
    }
}

/// Matrix carrying `(u, p·u')` across one layer.
pub fn layer_matrix(layer: &Layer, n_eff: f64, k0: f64, pol: Polarization) -> Matrix2c {
    let p = weight(pol, layer.index);
    let kappa2 = k0 * k0 * (layer.index * layer.index - n_eff * n_eff);
    let t = layer.thickness_nm;
    if kappa2 == 0.0 {
        return Matrix2c::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(t / p, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        );
    }
    let kappa = Complex64::new(kappa2, 0.0).sqrt();
    let (s, c) = ((kappa * t).sin(), (kappa * t).cos());
    Matrix2c::new(c, s / (kappa * p), -kappa * p * s, c)
}

/// Product of the layer matrices over the full finite stack, mapping the field
/// state at the left outer interface to the state at the right outer interface.
/// The outermost media are the continuation of the last reflector layer.
pub fn transfer_matrix(profile: &IndexProfile, n_eff: f64) -> Matrix2c {
    let k0 = profile.k0();
    profile
        .expanded_layers()
        .iter()
        .fold(Matrix2c::identity(), |acc, layer| {
            layer_matrix(layer, n_eff, k0, profile.pol) * acc
        })
}

/// Real 2×2 matrix `[[a, b], [c, d]]`; all transfer matrices are real for real n_eff.
#[derive(Debug, Clone, Copy)]
pub(crate) struct M2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl M2 {
    pub const IDENTITY: M2 = M2 {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn mul(&self, o: &M2) -> M2 {
        M2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }
}

/// Real layer matrix over a partial distance `dist_nm` inside `layer`.
pub(crate) fn layer_matrix_real(index: f64, dist_nm: f64, n_eff: f64, k0: f64, pol: Polarization) -> M2 {
    let p = weight(pol, index);
    let kappa2 = k0 * k0 * (index * index - n_eff * n_eff);
    if kappa2 > 0.0 {
        let k = kappa2.sqrt();
        let (s, c) = (k * dist_nm).sin_cos();
        M2 {
            a: c,
            b: s / (p * k),
            c: -p * k * s,
            d: c,
        }
    } else if kappa2 < 0.0 {
        let g = (-kappa2).sqrt();
        let x = g * dist_nm;
        let (s, c) = (x.sinh(), x.cosh());
        M2 {
            a: c,
            b: s / (p * g),
            c: p * g * s,
            d: c,
        }
    } else {
        M2 {
            a: 1.0,
            b: dist_nm / p,
            c: 0.0,
            d: 1.0,
        }
    }
}

pub(crate) fn cell_matrix(cell: &[Layer], n_eff: f64, k0: f64, pol: Polarization) -> M2 {
    cell.iter()
        .filter(|l| l.thickness_nm > 0.0)
        .fold(M2::IDENTITY, |acc, l| {
            layer_matrix_real(l.index, l.thickness_nm, n_eff, k0, pol).mul(&acc)
        })
}

/// Outgoing boundary state of a cladding, expressed in a frame where "outward"
/// is +y. `None` when the cladding supports propagating waves at this n_eff.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Termination {
    /// Unit vector `(u, p·u')` at the cladding boundary, outward frame.
    pub state: [f64; 2],
    /// Bloch multiplier per cell (|μ| < 1), or 0 for a homogeneous medium.
    pub mu: f64,
    /// Decay constant (1/nm) for a homogeneous medium.
    pub gamma: f64,
}

pub(crate) fn termination(cladding: &Cladding, n_eff: f64, k0: f64, pol: Polarization) -> Option<Termination> {
    match cladding {
        Cladding::Homogeneous { index } => {
            let g2 = k0 * k0 * (n_eff * n_eff - index * index);
            if g2 <= 0.0 {
                return None;
            }
            let gamma = g2.sqrt();
            let v = [1.0, -weight(pol, *index) * gamma];
            let norm = v[0].hypot(v[1]);
            Some(Termination {
                state: [v[0] / norm, v[1] / norm],
                mu: 0.0,
                gamma,
            })
        }
        Cladding::Periodic { cell, .. } => {
            let t = cell_matrix(cell, n_eff, k0, pol);
            let tr = t.a + t.d;
            if !(tr.abs() > 2.0) {
                return None;
            }
            let mu = (tr - tr.signum() * (tr * tr - 4.0).sqrt()) / 2.0;
            let v1 = [t.b, mu - t.a];
            let v2 = [mu - t.d, t.c];
            let (n1, n2) = (v1[0].hypot(v1[1]), v2[0].hypot(v2[1]));
            let (v, norm) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
            if !(norm > 0.0) {
                return None;
            }
            Some(Termination {
                state: [v[0] / norm, v[1] / norm],
                mu,
                gamma: 0.0,
            })
        }
    }
}

/// Real dispersion function whose zeros are the guided (decaying-boundary)
/// modes of `profile`. Returns NaN where either cladding supports propagating
/// waves, i.e. where no bound mode can exist.
pub fn dispersion_function(profile: &IndexProfile, n_eff: f64) -> f64 {
    let k0 = profile.k0();
    let pol = profile.pol;
    let (Some(left), Some(right)) = (
        termination(&profile.left, n_eff, k0, pol),
        termination(&profile.right, n_eff, k0, pol),
    ) else {
        return f64::NAN;
    };
    // Left cladding in the physical frame: mirror the derivative.
    let start = [left.state[0], -left.state[1]];
    let inner = profile
        .layers
        .iter()
        .filter(|l| l.thickness_nm > 0.0)
        .fold(M2::IDENTITY, |acc, l| {
            layer_matrix_real(l.index, l.thickness_nm, n_eff, k0, pol).mul(&acc)
        });
    let end = inner.apply(start);
    end[0] * right.state[1] - end[1] * right.state[0]
}
