// SPDX-License-Identifier: Apache-2.0

//! Composition- and wavelength-dependent refractive index of Al_xGa_{1-x}N.
//!
//! Coefficients are read from a TOML data file. Each node carries one
//! Sellmeier coefficient vector for one polarization at one Al fraction:
//!
//! ```toml
//! name = "AlGaN"
//! version = "1"
//! interpolation = "linear-coefficients"
//!
//! [[node]]
//! x = 0.0
//! polarization = "TE"
//! coefficients = [A, B1, C1, B2, C2]   # n² = A + Σ B_k λ² / (λ² − C_k²), λ in µm
//! wavelength_nm = [600.0, 1800.0]
//! ```
//!
//! Between nodes the coefficient vectors are interpolated linearly in `x`, so the
//! functional form in λ is preserved. TE uses the ordinary index and TM the
//! extraordinary one (c-axis normal to the layers).

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wavelength window (nm) every shipped or user-supplied model must cover.
pub const REQUIRED_WAVELENGTH_NM: [f64; 2] = [700.0, 1600.0];
/// Al-fraction window every model must cover.
pub const REQUIRED_COMPOSITION: [f64; 2] = [0.3, 0.9];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    TE,
    TM,
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarization::TE => f.write_str("TE"),
            Polarization::TM => f.write_str("TM"),
        }
    }
}

impl std::str::FromStr for Polarization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "TE" => Ok(Polarization::TE),
            "TM" => Ok(Polarization::TM),
            other => Err(Error::InvalidInput(format!(
                "unknown polarization '{other}' (expected TE or TM)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interpolation {
    #[serde(rename = "linear-coefficients")]
    LinearCoefficients,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialFile {
    name: String,
    #[serde(default)]
    version: Option<String>,
    #[serde(default)]
    description: Option<String>,
    interpolation: Interpolation,
    node: Vec<NodeRecord>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    x: f64,
    polarization: Polarization,
    coefficients: Vec<f64>,
    wavelength_nm: [f64; 2],
}

/// Sellmeier coefficients `[A, B1, C1, B2, C2, ...]` with λ and C in µm.
#[derive(Debug, Clone, PartialEq)]
pub struct Sellmeier {
    coefficients: Vec<f64>,
}

impl Sellmeier {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() || coefficients.len() % 2 == 0 {
            return Err(Error::InvalidInput(format!(
                "Sellmeier vector must be [A, B1, C1, ...] (odd length), got {} entries",
                coefficients.len()
            )));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite Sellmeier coefficient".into()));
        }
        Ok(Sellmeier { coefficients })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// n² at a vacuum wavelength in µm.
    pub fn epsilon(&self, lambda_um: f64) -> f64 {
        let l2 = lambda_um * lambda_um;
        let mut eps = self.coefficients[0];
        for term in self.coefficients[1..].chunks_exact(2) {
            let (b, c) = (term[0], term[1]);
            eps += b * l2 / (l2 - c * c);
        }
        eps
    }

    pub fn index(&self, lambda_um: f64) -> f64 {
        self.epsilon(lambda_um).sqrt()
    }

    fn lerp(&self, other: &Sellmeier, t: f64) -> Sellmeier {
        let coefficients = self
            .coefficients
            .iter()
            .zip(&other.coefficients)
            .map(|(a, b)| a + t * (b - a))
            .collect();
        Sellmeier { coefficients }
    }
}

#[derive(Debug, Clone)]
struct Node {
    x: f64,
    sellmeier: Sellmeier,
    wavelength_nm: [f64; 2],
}

/// Immutable refractive-index model; cheap to share between threads.
#[derive(Debug, Clone)]
pub struct MaterialModel {
    name: String,
    version: Option<String>,
    interpolation: Interpolation,
    te: Vec<Node>,
    tm: Vec<Node>,
    wavelength_range_nm: [f64; 2],
    composition_range: [f64; 2],
}

impl MaterialModel {
    /// Reads and validates a coefficient file, including the coverage check.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
            .map_err(|e| match e {
                Error::Parse { message, .. } => Error::parse(path.display().to_string(), message),
                other => other,
            })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: MaterialFile = toml::from_str(text).map_err(|e| Error::parse("material file", e))?;
        let _ = &file.description;
        let model = Self::from_nodes(
            file.name,
            file.version,
            file.interpolation,
            file.node
                .into_iter()
                .map(|n| (n.x, n.polarization, n.coefficients, n.wavelength_nm))
                .collect(),
        )?;
        model.check_coverage()?;
        Ok(model)
    }

    /// Builds a model from raw node tuples `(x, pol, coefficients, [λmin, λmax])`.
    /// Coverage is not checked here; see [`MaterialModel::check_coverage`].
    pub fn from_nodes(
        name: String,
        version: Option<String>,
        interpolation: Interpolation,
        nodes: Vec<(f64, Polarization, Vec<f64>, [f64; 2])>,
    ) -> Result<Self> {
        let mut te = Vec::new();
        let mut tm = Vec::new();
        for (x, pol, coefficients, wavelength_nm) in nodes {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::parse(
                    "material file",
                    format!("node composition x = {x} outside [0, 1]"),
                ));
            }
            if !(wavelength_nm[0] > 0.0 && wavelength_nm[1] > wavelength_nm[0]) {
                return Err(Error::parse(
                    "material file",
                    format!("node x = {x}: invalid wavelength range {wavelength_nm:?}"),
                ));
            }
            let sellmeier = Sellmeier::new(coefficients)
                .map_err(|e| Error::parse("material file", format!("node x = {x}: {e}")))?;
            let node = Node {
                x,
                sellmeier,
                wavelength_nm,
            };
            match pol {
                Polarization::TE => te.push(node),
                Polarization::TM => tm.push(node),
            }
        }
        if te.is_empty() && tm.is_empty() {
            return Err(Error::parse("material file", "no coefficient nodes"));
        }
        if te.is_empty() || tm.is_empty() {
            log::warn!(
                "material '{name}' provides a single polarization; using it for both TE and TM"
            );
            if te.is_empty() {
                te = tm.clone();
            } else {
                tm = te.clone();
            }
        }
        for nodes in [&mut te, &mut tm] {
            nodes.sort_by(|a, b| a.x.total_cmp(&b.x));
            for pair in nodes.windows(2) {
                if pair[0].x == pair[1].x {
                    return Err(Error::parse(
                        "material file",
                        format!("duplicate node at x = {}", pair[0].x),
                    ));
                }
                if pair[0].sellmeier.coefficients.len() != pair[1].sellmeier.coefficients.len() {
                    return Err(Error::parse(
                        "material file",
                        format!(
                            "nodes x = {} and x = {} have different numbers of Sellmeier terms",
                            pair[0].x, pair[1].x
                        ),
                    ));
                }
            }
        }

        let all = te.iter().chain(tm.iter());
        let wavelength_range_nm = all.clone().fold([f64::MIN, f64::MAX], |acc, n| {
            [acc[0].max(n.wavelength_nm[0]), acc[1].min(n.wavelength_nm[1])]
        });
        if wavelength_range_nm[0] >= wavelength_range_nm[1] {
            return Err(Error::parse(
                "material file",
                "node wavelength ranges do not overlap",
            ));
        }
        let composition_range = [
            te[0].x.max(tm[0].x),
            te[te.len() - 1].x.min(tm[tm.len() - 1].x),
        ];

        Ok(MaterialModel {
            name,
            version,
            interpolation,
            te,
            tm,
            wavelength_range_nm,
            composition_range,
        })
    }

    /// Fails unless the model covers the pipeline's operating window.
    pub fn check_coverage(&self) -> Result<()> {
        let [lmin, lmax] = self.wavelength_range_nm;
        if lmin > REQUIRED_WAVELENGTH_NM[0] || lmax < REQUIRED_WAVELENGTH_NM[1] {
            return Err(Error::Coverage(format!(
                "wavelength range [{lmin}, {lmax}] nm does not cover the required [{}, {}] nm",
                REQUIRED_WAVELENGTH_NM[0], REQUIRED_WAVELENGTH_NM[1]
            )));
        }
        let [xmin, xmax] = self.composition_range;
        if xmin > REQUIRED_COMPOSITION[0] || xmax < REQUIRED_COMPOSITION[1] {
            return Err(Error::Coverage(format!(
                "composition range [{xmin}, {xmax}] does not cover the required x in [{}, {}]",
                REQUIRED_COMPOSITION[0], REQUIRED_COMPOSITION[1]
            )));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn version(&self) -> Option<&str> {
        self.version.as_deref()
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn wavelength_range_nm(&self) -> [f64; 2] {
        self.wavelength_range_nm
    }

    pub fn composition_range(&self) -> [f64; 2] {
        self.composition_range
    }

    /// Tabulated compositions for one polarization.
    pub fn node_compositions(&self, pol: Polarization) -> Vec<f64> {
        self.nodes(pol).iter().map(|n| n.x).collect()
    }

    fn nodes(&self, pol: Polarization) -> &[Node] {
        match pol {
            Polarization::TE => &self.te,
            Polarization::TM => &self.tm,
        }
    }

    /// Sellmeier coefficients at composition `x` (interpolated between nodes).
    pub fn sellmeier_at(&self, x: f64, pol: Polarization) -> Result<Sellmeier> {
        let [xmin, xmax] = self.composition_range;
        if !(x >= xmin && x <= xmax) {
            return Err(Error::OutOfRange {
                quantity: "Al fraction x",
                value: x,
                min: xmin,
                max: xmax,
            });
        }
        let nodes = self.nodes(pol);
        let hi = nodes.partition_point(|n| n.x < x);
        if hi < nodes.len() && nodes[hi].x == x {
            return Ok(nodes[hi].sellmeier.clone());
        }
        let (a, b) = (&nodes[hi - 1], &nodes[hi]);
        let t = (x - a.x) / (b.x - a.x);
        Ok(a.sellmeier.lerp(&b.sellmeier, t))
    }

    /// Refractive index at Al fraction `x`, vacuum wavelength `lambda_nm`.
    pub fn refractive_index(&self, x: f64, lambda_nm: f64, pol: Polarization) -> Result<f64> {
        let [lmin, lmax] = self.wavelength_range_nm;
        if !(lambda_nm >= lmin && lambda_nm <= lmax) {
            return Err(Error::OutOfRange {
                quantity: "wavelength (nm)",
                value: lambda_nm,
                min: lmin,
                max: lmax,
            });
        }
        let eps = self.sellmeier_at(x, pol)?.epsilon(lambda_nm * 1e-3);
        if !(eps > 1.0) || !eps.is_finite() {
            return Err(Error::InvalidInput(format!(
                "material model yields n² = {eps} at x = {x}, λ = {lambda_nm} nm"
            )));
        }
        Ok(eps.sqrt())
    }
}

/// Location of the AlGaN coefficient file shipped with the repository.
pub fn default_material_path() -> std::path::PathBuf {
    let workspace = Path::new(env!("CARGO_MANIFEST_DIR")).ancestors().nth(2).expect("crate sits two levels deep");
    workspace.join("data").join("algan.toml")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_node_model() -> MaterialModel {
        MaterialModel::from_toml_str(
            r#"
            name = "toy"
            interpolation = "linear-coefficients"
            [[node]]
            x = 0.0
            polarization = "TE"
            coefficients = [4.0, 1.0, 0.2]
            wavelength_nm = [500.0, 2000.0]
            [[node]]
            x = 1.0
            polarization = "TE"
            coefficients = [3.0, 1.2, 0.1]
            wavelength_nm = [500.0, 2000.0]
            "#,
        )
        .unwrap()
    }

    #[test]
    fn single_polarization_file_serves_both() {
        let m = two_node_model();
        let te = m.refractive_index(0.4, 1000.0, Polarization::TE).unwrap();
        let tm = m.refractive_index(0.4, 1000.0, Polarization::TM).unwrap();
        assert_eq!(te.to_bits(), tm.to_bits());
    }

    #[test]
    fn node_identity_and_midpoint_bound() {
        let m = two_node_model();
        let direct = (4.0 + 1.0 * 1.0 / (1.0 - 0.04_f64)).sqrt();
        let n0 = m.refractive_index(0.0, 1000.0, Polarization::TE).unwrap();
        assert!((n0 - direct).abs() < 1e-12);
        let n1 = m.refractive_index(1.0, 1000.0, Polarization::TE).unwrap();
        let mid = m.refractive_index(0.5, 1000.0, Polarization::TE).unwrap();
        assert!(mid < n0.max(n1) && mid > n0.min(n1));
    }

    #[test]
    fn out_of_range_queries_are_errors() {
        let m = two_node_model();
        assert!(matches!(
            m.refractive_index(0.5, 400.0, Polarization::TE),
            Err(Error::OutOfRange { .. })
        ));
        assert!(matches!(
            m.refractive_index(1.2, 1000.0, Polarization::TE),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn narrow_composition_coverage_is_rejected() {
        let err = MaterialModel::from_toml_str(
            r#"
            name = "narrow"
            interpolation = "linear-coefficients"
            [[node]]
            x = 0.5
            polarization = "TE"
            coefficients = [4.0, 1.0, 0.2]
            wavelength_nm = [500.0, 2000.0]
            [[node]]
            x = 0.6
            polarization = "TE"
            coefficients = [3.9, 1.0, 0.2]
            wavelength_nm = [500.0, 2000.0]
            "#,
        )
        .unwrap_err();
        match err {
            Error::Coverage(msg) => assert!(msg.contains("[0.5, 0.6]"), "{msg}"),
            other => panic!("expected coverage error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_file_is_parse_error() {
        let err = MaterialModel::from_toml_str("name = 3").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        let err = MaterialModel::from_toml_str(
            r#"
            name = "bad"
            interpolation = "linear-coefficients"
            [[node]]
            x = 0.0
            polarization = "TE"
            coefficients = [4.0, 1.0]
            wavelength_nm = [500.0, 2000.0]
            "#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }
}
