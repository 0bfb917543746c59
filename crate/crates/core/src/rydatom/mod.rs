//! Atomic and cavity inputs: Rydberg level energies from quantum defects,
//! Numerov radial functions, π-transition dipole elements, the cavity field
//! per photon and the resulting atom-cavity coupling rates.
//!
//! Atomic units are used internally. Frequencies leave this module in rad/µs,
//! dipoles in C·m and fields in V/m.

pub mod angular;
pub mod numerov;
mod species;

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

pub use numerov::{radial_wavefunction, Coulomb, ModelPotential, RadialGrid, RadialWavefunction};
pub use species::{DefectModel, RitzCoefficients};

use crate::error::{Error, Result};
use crate::units::{per_us, BOHR_RADIUS, ELEMENTARY_CHARGE, EPSILON_0, HBAR, SPEED_OF_LIGHT};

/// |n l j m_j⟩ of a single valence electron. `j` and `m_j` are stored doubled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "LevelSpec", into = "LevelSpec")]
pub struct RydbergLevel {
    n: u32,
    l: u32,
    j2: u32,
    mj2: i32,
}

/// Plain-number form of a level used in config files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSpec {
    pub n: u32,
    pub l: u32,
    pub j: f64,
    pub mj: f64,
}

impl TryFrom<LevelSpec> for RydbergLevel {
    type Error = Error;
    fn try_from(s: LevelSpec) -> Result<Self> {
        RydbergLevel::new(s.n, s.l, s.j, s.mj)
    }
}

impl From<RydbergLevel> for LevelSpec {
    fn from(level: RydbergLevel) -> Self {
        LevelSpec { n: level.n, l: level.l, j: level.j(), mj: level.mj() }
    }
}

fn doubled(value: f64, what: &str) -> Result<i32> {
    let twice = 2.0 * value;
    if (twice - twice.round()).abs() > 1e-9 {
        return Err(Error::InvalidLevel(format!("{what} = {value} is not a half-integer")));
    }
    Ok(twice.round() as i32)
}

impl RydbergLevel {
    pub fn new(n: u32, l: u32, j: f64, mj: f64) -> Result<Self> {
        let j2 = doubled(j, "j")?;
        let mj2 = doubled(mj, "m_j")?;
        if n < 1 || l >= n {
            return Err(Error::InvalidLevel(format!("need 0 <= l < n, got n = {n}, l = {l}")));
        }
        if (j2 - 2 * l as i32).abs() != 1 {
            return Err(Error::InvalidLevel(format!("j = {j} incompatible with l = {l}")));
        }
        if mj2.abs() > j2 || (j2 - mj2) % 2 != 0 {
            return Err(Error::InvalidLevel(format!("m_j = {mj} invalid for j = {j}")));
        }
        Ok(Self { n, l, j2: j2 as u32, mj2 })
    }

    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn l(&self) -> u32 {
        self.l
    }
    pub fn j(&self) -> f64 {
        self.j2 as f64 / 2.0
    }
    pub fn j2(&self) -> u32 {
        self.j2
    }
    pub fn mj(&self) -> f64 {
        self.mj2 as f64 / 2.0
    }
    pub fn mj2(&self) -> i32 {
        self.mj2
    }
}

impl std::fmt::Display for RydbergLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        const SERIES: [char; 7] = ['S', 'P', 'D', 'F', 'G', 'H', 'I'];
        let letter = SERIES.get(self.l as usize).copied().unwrap_or('?');
        write!(f, "{}{}_{}/2 (m_j = {}/2)", self.n, letter, self.j2, self.mj2)
    }
}

/// Rydberg-Ritz quantum defect δ0 + δ2/(n − δ0)².
pub fn quantum_defect(model: &DefectModel, level: &RydbergLevel) -> Result<f64> {
    let c = model.series(level)?;
    let m = level.n as f64 - c.delta0;
    Ok(c.delta0 + c.delta2 / (m * m))
}

pub fn effective_n(model: &DefectModel, level: &RydbergLevel) -> Result<f64> {
    let n_star = level.n as f64 - quantum_defect(model, level)?;
    if !(n_star > 0.0) {
        return Err(Error::InvalidLevel(format!("{level} has n* = {n_star} <= 0")));
    }
    Ok(n_star)
}

/// Binding energy −Ry/n*² as an angular frequency in rad/µs.
pub fn level_energy(model: &DefectModel, level: &RydbergLevel) -> Result<f64> {
    let n_star = effective_n(model, level)?;
    let rydberg_rad_s = TAU * SPEED_OF_LIGHT * 100.0 * model.rydberg_constant_inv_cm;
    Ok(-per_us(rydberg_rad_s) / (n_star * n_star))
}

/// E(upper) − E(lower) in rad/µs.
pub fn transition_frequency(model: &DefectModel, upper: &RydbergLevel, lower: &RydbergLevel) -> Result<f64> {
    Ok(level_energy(model, upper)? - level_energy(model, lower)?)
}

/// Radial function of `level` on `grid` with the bare Coulomb potential.
pub fn level_wavefunction(model: &DefectModel, level: &RydbergLevel, grid: &RadialGrid) -> Result<RadialWavefunction> {
    radial_wavefunction(effective_n(model, level)?, level.l, grid, &Coulomb)
}

/// ∫ u_a u_b r dr in Bohr radii on a shared grid with `points` samples.
pub fn radial_integral(
    a: &RydbergLevel,
    b: &RydbergLevel,
    model: &DefectModel,
    potential: &dyn ModelPotential,
    points: usize,
) -> Result<f64> {
    let (na, nb) = (effective_n(model, a)?, effective_n(model, b)?);
    let grid = RadialGrid::for_pair(na, nb, model.core_radius_bohr).with_points(points)?;
    let ua = radial_wavefunction(na, a.l, &grid, potential)?;
    let ub = radial_wavefunction(nb, b.l, &grid, potential)?;
    ua.radial_overlap_r(&ub)
}

/// ⟨a| e z |b⟩ in C·m. Forbidden transitions give exactly 0.
pub fn dipole_matrix_element(a: &RydbergLevel, b: &RydbergLevel, model: &DefectModel) -> Result<f64> {
    dipole_matrix_element_with(a, b, model, &Coulomb, numerov::DEFAULT_GRID_POINTS)
}

pub fn dipole_matrix_element_with(
    a: &RydbergLevel,
    b: &RydbergLevel,
    model: &DefectModel,
    potential: &dyn ModelPotential,
    points: usize,
) -> Result<f64> {
    let angular = angular::pi_angular_factor(a.l, a.j2, a.mj2, b.l, b.j2, b.mj2);
    if angular == 0.0 {
        return Ok(0.0);
    }
    let radial = radial_integral(a, b, model, potential, points)?;
    Ok(ELEMENTARY_CHARGE * BOHR_RADIUS * angular * radial)
}

/// Coplanar-resonator mode parameters (SI).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityGeometry {
    /// Electrode distance in m.
    pub d: f64,
    /// Resonator length in m.
    pub length: f64,
    pub epsilon_r: f64,
    /// Mode angular frequency in rad/s.
    pub omega_c: f64,
    pub quality: f64,
}

impl CavityGeometry {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("d", self.d),
            ("length", self.length),
            ("epsilon_r", self.epsilon_r),
            ("omega_c", self.omega_c),
            ("quality", self.quality),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParam(format!("cavity {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// V_c = 2π d² L.
    pub fn mode_volume(&self) -> f64 {
        2.0 * PI * self.d * self.d * self.length
    }

    /// Guided wavelength λ/√ε_r of the mode.
    pub fn guided_wavelength(&self) -> f64 {
        TAU * SPEED_OF_LIGHT / self.omega_c / self.epsilon_r.sqrt()
    }
}

/// ε_c = √(ħω_c / ε₀V_c) in V/m.
pub fn field_per_photon(geom: &CavityGeometry) -> f64 {
    (HBAR * geom.omega_c / (EPSILON_0 * geom.mode_volume())).sqrt()
}

/// g = −℘ ε_c / ħ in rad/µs.
pub fn coupling_rate(dipole: f64, field: f64) -> f64 {
    per_us(-dipole * field / HBAR)
}

/// ω_c / Q in rad/µs.
pub fn cavity_decay(geom: &CavityGeometry) -> f64 {
    per_us(geom.omega_c / geom.quality)
}
