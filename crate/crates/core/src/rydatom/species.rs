//! Quantum-defect species data, loaded from a JSON file.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::RydbergLevel;
use crate::error::{Error, Result};

/// Rydberg-Ritz coefficients of one (l, j) series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RitzCoefficients {
    pub delta0: f64,
    pub delta2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpeciesFile {
    version: u32,
    element: String,
    #[serde(default)]
    source: Option<String>,
    rydberg_constant_inv_cm: f64,
    #[serde(default = "default_core_radius")]
    core_radius_bohr: f64,
    series: BTreeMap<String, RitzCoefficients>,
}

fn default_core_radius() -> f64 {
    2.0
}

/// Per-series quantum defects of one alkali species.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectModel {
    pub element: String,
    pub source: Option<String>,
    /// Mass-corrected Rydberg constant in cm⁻¹.
    pub rydberg_constant_inv_cm: f64,
    /// Inner cutoff for the radial integration, in Bohr radii.
    pub core_radius_bohr: f64,
    /// Keyed by (l, 2j).
    series: BTreeMap<(u32, u32), RitzCoefficients>,
}

impl DefectModel {
    pub fn new(element: impl Into<String>, rydberg_constant_inv_cm: f64) -> Self {
        Self {
            element: element.into(),
            source: None,
            rydberg_constant_inv_cm,
            core_radius_bohr: default_core_radius(),
            series: BTreeMap::new(),
        }
    }

    pub fn with_series(mut self, l: u32, j: f64, coefficients: RitzCoefficients) -> Self {
        self.series.insert((l, (2.0 * j).round() as u32), coefficients);
        self
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: SpeciesFile = serde_json::from_str(text)?;
        if file.version != 1 {
            return Err(Error::Config(format!("unsupported species file version {}", file.version)));
        }
        if !(file.rydberg_constant_inv_cm > 0.0) {
            return Err(Error::Config("rydberg_constant_inv_cm must be positive".into()));
        }
        let mut series = BTreeMap::new();
        for (key, coefficients) in file.series {
            let (l, j) = key
                .split_once(',')
                .and_then(|(l, j)| Some((l.trim().parse::<u32>().ok()?, j.trim().parse::<f64>().ok()?)))
                .ok_or_else(|| Error::Config(format!("bad series key {key:?}, expected \"l,j\"")))?;
            let j2 = 2.0 * j;
            if (j2 - j2.round()).abs() > 1e-9 || (j2.round() as i64 - 2 * l as i64).abs() != 1 {
                return Err(Error::Config(format!("series key {key:?} is not a valid (l, j) pair")));
            }
            series.insert((l, j2.round() as u32), coefficients);
        }
        Ok(Self {
            element: file.element,
            source: file.source,
            rydberg_constant_inv_cm: file.rydberg_constant_inv_cm,
            core_radius_bohr: file.core_radius_bohr,
            series,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    /// The 87Rb data file shipped with the crate.
    pub fn rubidium87() -> Self {
        Self::from_json_str(include_str!("../../data/rb87.json")).expect("bundled species file is valid")
    }

    pub fn series(&self, level: &RydbergLevel) -> Result<RitzCoefficients> {
        self.series
            .get(&(level.l(), level.j2()))
            .copied()
            .ok_or(Error::MissingSeries { l: level.l(), j: level.j() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_file_parses() {
        let rb = DefectModel::rubidium87();
        assert_eq!(rb.element, "87Rb");
        let s = RydbergLevel::new(67, 0, 0.5, 0.5).unwrap();
        assert!((rb.series(&s).unwrap().delta0 - 3.1311807).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_keys() {
        let text = r#"{"version":1,"element":"X","rydberg_constant_inv_cm":1.0,
            "series":{"0,1.5":{"delta0":1.0,"delta2":0.0}}}"#;
        assert!(DefectModel::from_json_str(text).is_err());
        let text = r#"{"version":1,"element":"X","rydberg_constant_inv_cm":1.0,"bogus":3,
            "series":{}}"#;
        assert!(DefectModel::from_json_str(text).is_err());
    }
}
