// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::modesolver::{GuidedMode, ModeTracker, Waveguide};
use crate::{omega_from_wavelength_nm, wavelength_nm_from_omega, SPEED_OF_LIGHT};

/// Speed of light in µm/s, so that Ω/c is in rad/µm.
pub(crate) const C_UM_PER_S: f64 = SPEED_OF_LIGHT * 1e6;

/// Propagation constant of one mode as a function of detuning from its
/// central frequency.
pub trait ModeDispersion: Send + Sync {
    /// Central angular frequency, rad/s.
    fn omega0(&self) -> f64;

    /// β in rad/µm at detuning `omega` (rad/s).
    fn beta(&self, omega: f64) -> Result<f64>;

    /// Group index at the centre.
    fn group_index(&self) -> Result<f64>;

    /// β at many detunings. Implementations that track a mode may exploit the
    /// ordering to continue from neighbouring solutions.
    fn beta_many(&self, omegas: &[f64]) -> Result<Vec<f64>> {
        omegas.iter().map(|&w| self.beta(w)).collect()
    }

    fn lambda0_nm(&self) -> f64 {
        wavelength_nm_from_omega(self.omega0())
    }
}

/// β exactly linear in frequency: β(Ω) = β₀ + N·Ω/c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearDispersion {
    pub omega0: f64,
    /// rad/µm.
    pub beta0: f64,
    pub group_index: f64,
}

impl LinearDispersion {
    pub fn new(lambda0_nm: f64, beta0: f64, group_index: f64) -> Self {
        LinearDispersion {
            omega0: omega_from_wavelength_nm(lambda0_nm),
            beta0,
            group_index,
        }
    }
}

impl ModeDispersion for LinearDispersion {
    fn omega0(&self) -> f64 {
        self.omega0
    }

    fn beta(&self, omega: f64) -> Result<f64> {
        Ok(self.beta0 + self.group_index * omega / C_UM_PER_S)
    }

    fn group_index(&self) -> Result<f64> {
        Ok(self.group_index)
    }
}

/// A waveguide mode followed across frequency with the transfer-matrix solver.
#[derive(Debug, Clone)]
pub struct TrackedDispersion {
    waveguide: Waveguide,
    mode: GuidedMode,
    role: &'static str,
}

impl TrackedDispersion {
    pub fn new(waveguide: Waveguide, mode: GuidedMode, role: &'static str) -> Self {
        TrackedDispersion { waveguide, mode, role }
    }

    pub fn mode(&self) -> &GuidedMode {
        &self.mode
    }

    fn tracker(&self) -> ModeTracker<'_> {
        ModeTracker::new(&self.waveguide, &self.mode)
    }

    fn beta_from_n(&self, omega: f64, n: f64) -> f64 {
        n * (self.omega0() + omega) / C_UM_PER_S
    }

    fn tracking_error(&self, omega: f64, e: Error) -> Error {
        let lambda = wavelength_nm_from_omega(self.omega0() + omega);
        Error::ModeTracking(format!(
            "{} mode at detuning {omega:.4e} rad/s ({lambda:.3} nm): {e}",
            self.role
        ))
    }
}

impl ModeDispersion for TrackedDispersion {
    fn omega0(&self) -> f64 {
        omega_from_wavelength_nm(self.mode.lambda_nm)
    }

    fn beta(&self, omega: f64) -> Result<f64> {
        let lambda = wavelength_nm_from_omega(self.omega0() + omega);
        let n = self
            .tracker()
            .n_eff_at(lambda)
            .map_err(|e| self.tracking_error(omega, e))?;
        Ok(self.beta_from_n(omega, n))
    }

    fn group_index(&self) -> Result<f64> {
        Ok(self.tracker().group_index()?.value)
    }

    /// Continues outward from the centre in both directions, extrapolating
    /// n_eff linearly from the two previous solutions as the next guess.
    fn beta_many(&self, omegas: &[f64]) -> Result<Vec<f64>> {
        let tracker = self.tracker();
        let mut order: Vec<usize> = (0..omegas.len()).collect();
        order.sort_by(|&a, &b| omegas[a].total_cmp(&omegas[b]));
        let split = order.partition_point(|&k| omegas[k] < 0.0);
        let (below, above) = order.split_at(split);

        let mut n_out = vec![0.0; omegas.len()];
        let seed = (0.0, self.mode.n_eff);
        let mut walk = |idx: &mut dyn Iterator<Item = &usize>| -> Result<()> {
            let (mut prev, mut last) = (seed, seed);
            for &k in idx {
                let w = omegas[k];
                let guess = if prev.0 != last.0 {
                    last.1 + (last.1 - prev.1) / (last.0 - prev.0) * (w - last.0)
                } else {
                    last.1
                };
                let lambda = wavelength_nm_from_omega(self.omega0() + w);
                let n = if w == 0.0 {
                    self.mode.n_eff
                } else {
                    tracker
                        .n_eff_near(lambda, guess)
                        .map_err(|e| self.tracking_error(w, e))?
                };
                n_out[k] = n;
                prev = last;
                last = (w, n);
            }
            Ok(())
        };
        walk(&mut above.iter())?;
        walk(&mut below.iter().rev())?;
        Ok(omegas
            .iter()
            .zip(&n_out)
            .map(|(&w, &n)| self.beta_from_n(w, n))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_dispersion_slope_is_group_index() {
        let d = LinearDispersion::new(1550.0, 9.0, 2.3);
        let h = 1e12;
        let slope = (d.beta(h).unwrap() - d.beta(-h).unwrap()) / (2.0 * h) * C_UM_PER_S;
        assert!((slope - 2.3).abs() < 1e-9);
        assert!((d.lambda0_nm() - 1550.0).abs() < 1e-9);
    }
}
