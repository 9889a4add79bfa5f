// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modesolver::DEFAULT_BILAYERS;

pub const N_GENES: usize = 6;
pub const GENE_NAMES: [&str; N_GENES] = ["t_c", "t_1", "t_2", "x_c", "x_1", "x_2"];

/// Closed `[min, max]` interval per gene; thicknesses in nm. `min == max`
/// pins a gene.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub t_c: [f64; 2],
    pub t_1: [f64; 2],
    pub t_2: [f64; 2],
    pub x_c: [f64; 2],
    pub x_1: [f64; 2],
    pub x_2: [f64; 2],
}

impl Bounds {
    pub fn as_array(&self) -> [[f64; 2]; N_GENES] {
        [self.t_c, self.t_1, self.t_2, self.x_c, self.x_1, self.x_2]
    }

    /// Bounds of ±`fraction` around `centre`, with Al fractions kept in [0, 1].
    pub fn around(centre: &[f64; N_GENES], fraction: f64) -> Self {
        let b = |k: usize| {
            let (lo, hi) = (centre[k] * (1.0 - fraction), centre[k] * (1.0 + fraction));
            if k >= 3 {
                [lo.max(0.0), hi.min(1.0)]
            } else {
                [lo, hi]
            }
        };
        Bounds {
            t_c: b(0),
            t_1: b(1),
            t_2: b(2),
            x_c: b(3),
            x_1: b(4),
            x_2: b(5),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, [lo, hi]) in GENE_NAMES.iter().zip(self.as_array()) {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidInput(format!("bounds for {name}: [{lo}, {hi}]")));
            }
            let physical = if name.starts_with('t') { lo > 0.0 } else { lo >= 0.0 && hi <= 1.0 };
            if !physical {
                return Err(Error::InvalidInput(format!("bounds for {name} are unphysical: [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

/// Group-velocity condition the search aims for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetMode {
    /// N_p = (N_s + N_i)/2: identical signal and idler spectra.
    EqualSpectra,
    /// N_p = N_s: signal much broader than idler.
    UnequalSpectra,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weights {
    pub gvm: f64,
    pub overlap: f64,
    pub k: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights { gvm: 1e4, overlap: 1.0, k: 1.0 }
    }
}

/// Genetic-algorithm settings, read from TOML. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GAConfig {
    pub seed: u64,
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    /// Mutation standard deviation as a fraction of each gene's range.
    pub mutation_sigma: f64,
    pub elitism: usize,
    pub tournament_size: usize,
    pub target: TargetMode,
    pub weights: Weights,
    pub length_mm: f64,
    pub n_bilayers: usize,
    pub signal_nm: f64,
    pub idler_nm: f64,
    /// Points per axis of the JSA used for the Schmidt number.
    pub grid_points: usize,
    /// Distinct winners reported.
    pub top_k: usize,
    pub bounds: Bounds,
}

impl Default for GAConfig {
    fn default() -> Self {
        GAConfig {
            seed: 0,
            population: 64,
            generations: 200,
            crossover_rate: 0.9,
            mutation_rate: 0.2,
            mutation_sigma: 0.02,
            elitism: 2,
            tournament_size: 3,
            target: TargetMode::EqualSpectra,
            weights: Weights::default(),
            length_mm: 4.0,
            n_bilayers: DEFAULT_BILAYERS,
            signal_nm: 1550.0,
            idler_nm: 1550.0,
            grid_points: 128,
            top_k: 5,
            bounds: Bounds::around(&[1000.0, 450.0, 650.0, 0.55, 0.4, 0.75], 0.1),
        }
    }
}

impl GAConfig {
    pub fn with_bounds(bounds: Bounds) -> Self {
        GAConfig { bounds, ..GAConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        for (name, r) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return bad(format!("{name} = {r} must lie in [0, 1]"));
            }
        }
        if !(self.mutation_sigma >= 0.0 && self.mutation_sigma.is_finite()) {
            return bad(format!("mutation_sigma = {} must be non-negative", self.mutation_sigma));
        }
        if self.population < 4 {
            return bad(format!("population = {} must be at least 4", self.population));
        }
        if self.elitism >= self.population {
            return bad(format!("elitism = {} must be below the population size", self.elitism));
        }
        if self.tournament_size == 0 {
            return bad("tournament_size must be positive".into());
        }
        let w = self.weights;
        if [w.gvm, w.overlap, w.k].iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
            return bad(format!("weights must be non-negative: {w:?}"));
        }
        if w.gvm + w.overlap + w.k <= 0.0 {
            return bad("at least one weight must be positive".into());
        }
        if !(self.length_mm > 0.0) || self.n_bilayers == 0 || self.grid_points < 8 || self.top_k == 0 {
            return bad("length_mm, n_bilayers, top_k must be positive and grid_points at least 8".into());
        }
        if !(self.signal_nm > 0.0 && self.idler_nm > 0.0) {
            return bad("signal and idler wavelengths must be positive".into());
        }
        self.bounds.validate()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let c: GAConfig = toml::from_str(text).map_err(|e| Error::parse("GA config", e))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("GAConfig serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_takes_defaults() {
        let c = GAConfig::from_toml_str(
            r#"
            seed = 3
            target = "unequal-spectra"
            [bounds]
            t_c = [900.0, 1100.0]
            t_1 = [400.0, 500.0]
            t_2 = [700.0, 900.0]
            x_c = [0.5, 0.6]
            x_1 = [0.4, 0.5]
            x_2 = [0.8, 0.9]
            "#,
        )
        .unwrap();
        assert_eq!(c.population, 64);
        assert_eq!(c.generations, 200);
        assert_eq!(c.elitism, 2);
        assert_eq!(c.target, TargetMode::UnequalSpectra);
        assert_eq!(GAConfig::from_toml_str(&c.to_toml_string()).unwrap(), c);
    }

    #[test]
    fn invalid_settings_are_rejected() {
        let base = GAConfig::default();
        assert!(base.validate().is_ok());
        assert!(GAConfig { population: 3, ..base.clone() }.validate().is_err());
        assert!(GAConfig { mutation_rate: 1.5, ..base.clone() }.validate().is_err());
        let zero = Weights { gvm: 0.0, overlap: 0.0, k: 0.0 };
        assert!(GAConfig { weights: zero, ..base.clone() }.validate().is_err());
        let mut b = base.bounds;
        b.x_2 = [0.9, 1.2];
        assert!(GAConfig::with_bounds(b).validate().is_err());
        assert!(GAConfig::from_toml_str("population = 10").is_ok());
        assert!(GAConfig::from_toml_str("populaton = 10").is_err());
    }
}
