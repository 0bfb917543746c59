//! JSON run configuration. Frequencies are ordinary frequencies in MHz
//! (a value f means 2π·f rad/µs internally); times are in µs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::integrator::Tolerance;
use crate::dynamics::{EnsembleOptions, RunOptions};
use crate::error::{Error, Result};
use crate::hamiltonian::{PulseSchedule, SystemParams};
use crate::rydatom::{CavityGeometry, LevelSpec, RydbergLevel};
use crate::units::mhz;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Potentials,
    Evolve,
    Mc,
    Sweep,
    Dark,
    Dipole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub n_atoms: u32,
    pub delta_r_mhz: f64,
    pub delta_v_mhz: f64,
    pub g_qr_mhz: f64,
    pub g_uv_mhz: f64,
    pub gamma_eg_mhz: f64,
    pub gamma_r_mhz: f64,
    pub gamma_v_mhz: f64,
    pub kappa_mhz: f64,
    pub omega_max_mhz: f64,
    pub n_max: u32,
    /// Detune the v laser by |g_uv|²/Δ_v. Explicit comp_* values win.
    #[serde(default = "yes")]
    pub stark_compensation: bool,
    #[serde(default)]
    pub comp_r_mhz: Option<f64>,
    #[serde(default)]
    pub comp_v_mhz: Option<f64>,
}

fn yes() -> bool {
    true
}

impl SystemConfig {
    pub fn to_params(&self) -> Result<SystemParams> {
        let mut p = SystemParams {
            n_atoms: self.n_atoms,
            delta_r: mhz(self.delta_r_mhz),
            delta_v: mhz(self.delta_v_mhz),
            g_qr: mhz(self.g_qr_mhz),
            g_uv: mhz(self.g_uv_mhz),
            gamma_eg: mhz(self.gamma_eg_mhz),
            gamma_r: mhz(self.gamma_r_mhz),
            gamma_v: mhz(self.gamma_v_mhz),
            kappa: mhz(self.kappa_mhz),
            comp_r: 0.0,
            comp_v: 0.0,
            omega_max: mhz(self.omega_max_mhz),
            n_max: self.n_max,
        };
        if self.stark_compensation {
            p = p.with_stark_compensation();
        }
        if let Some(c) = self.comp_r_mhz {
            p.comp_r = mhz(c);
        }
        if let Some(c) = self.comp_v_mhz {
            p.comp_v = mhz(c);
        }
        p.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub beta_us: f64,
    /// Centers; default to the standard ordering (Rydberg pulses first).
    #[serde(default)]
    pub t_ge_us: Option<f64>,
    #[serde(default)]
    pub t_rydberg_us: Option<f64>,
}

impl PulseConfig {
    pub fn schedule(&self, beta: f64, omega_max: f64) -> Result<PulseSchedule> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Config(format!("beta_us must be positive, got {beta}")));
        }
        Ok(match (self.t_ge_us, self.t_rydberg_us) {
            (None, None) => PulseSchedule::adiabatic_passage(beta, omega_max),
            (Some(a), Some(b)) => PulseSchedule::with_centers(beta, omega_max, a, b),
            _ => return Err(Error::Config("t_ge_us and t_rydberg_us must be given together".into())),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default)]
    pub span_us: Option<(f64, f64)>,
}

fn default_samples() -> usize {
    RunOptions::default().samples
}
fn default_rtol() -> f64 {
    Tolerance::default().rtol
}
fn default_atol() -> f64 {
    Tolerance::default().atol
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self { samples: default_samples(), rtol: default_rtol(), atol: default_atol(), span_us: None }
    }
}

impl IntegrationConfig {
    pub fn run_options(&self) -> Result<RunOptions> {
        if self.samples < 2 {
            return Err(Error::Config("integration.samples must be at least 2".into()));
        }
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::Config("integration tolerances must be positive".into()));
        }
        Ok(RunOptions {
            samples: self.samples,
            span: self.span_us,
            tolerance: Tolerance { rtol: self.rtol, atol: self.atol },
            keep_states: false,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    #[serde(default = "default_traj")]
    pub trajectories: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// 0 means all available cores.
    #[serde(default)]
    pub workers: usize,
    /// Also write one CSV per trajectory.
    #[serde(default)]
    pub per_trajectory_csv: bool,
}

fn default_traj() -> usize {
    100
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self { trajectories: default_traj(), master_seed: 0, workers: 0, per_trajectory_csv: false }
    }
}

impl EnsembleConfig {
    pub fn options(&self) -> EnsembleOptions {
        EnsembleOptions { trajectories: self.trajectories, master_seed: self.master_seed, workers: self.workers }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub betas_us: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityConfig {
    pub d_um: f64,
    pub length_cm: f64,
    #[serde(default = "one")]
    pub epsilon_r: f64,
    pub frequency_ghz: f64,
    #[serde(default)]
    pub quality: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl CavityConfig {
    pub fn geometry(&self) -> Result<CavityGeometry> {
        let g = CavityGeometry {
            d: self.d_um * 1e-6,
            length: self.length_cm * 1e-2,
            epsilon_r: self.epsilon_r,
            omega_c: std::f64::consts::TAU * self.frequency_ghz * 1e9,
            quality: self.quality.unwrap_or(f64::MAX),
        };
        g.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    /// Quantum-defect data file; the bundled ⁸⁷Rb table when absent.
    #[serde(default)]
    pub species_file: Option<PathBuf>,
    pub r: LevelSpec,
    pub q: LevelSpec,
    pub v: LevelSpec,
    pub u: LevelSpec,
    pub cavity: CavityConfig,
}

impl AtomConfig {
    pub fn levels(&self) -> Result<[RydbergLevel; 4]> {
        let conv = |s: &LevelSpec| RydbergLevel::new(s.n, s.l, s.j, s.mj).map_err(|e| Error::Config(e.to_string()));
        Ok([conv(&self.r)?, conv(&self.q)?, conv(&self.v)?, conv(&self.u)?])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DarkConfig {
    /// Random Ω triples per atom number in the closure scan.
    #[serde(default = "default_dark_samples")]
    pub random_triples: usize,
    #[serde(default = "default_dark_atoms")]
    pub max_atoms: u32,
}

fn default_dark_samples() -> usize {
    100
}
fn default_dark_atoms() -> u32 {
    8
}

impl Default for DarkConfig {
    fn default() -> Self {
        Self { random_triples: default_dark_samples(), max_atoms: default_dark_atoms() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    /// Stem for output file names.
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub system: Option<SystemConfig>,
    #[serde(default)]
    pub pulses: Option<PulseConfig>,
    #[serde(default)]
    pub integration: IntegrationConfig,
    #[serde(default)]
    pub ensemble: EnsembleConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub atom: Option<AtomConfig>,
    #[serde(default)]
    pub dark: DarkConfig,
}

fn default_name() -> String {
    "run".into()
}

/// Bundled parameter sets.
pub const PRESETS: [(&str, &str); 7] = [
    ("fig3_n5", include_str!("../presets/fig3_n5.json")),
    ("fig4_n5", include_str!("../presets/fig4_n5.json")),
    ("fig4_n10", include_str!("../presets/fig4_n10.json")),
    ("fig2b_n10", include_str!("../presets/fig2b_n10.json")),
    ("dipole", include_str!("../presets/dipole.json")),
    ("dark_n5", include_str!("../presets/dark_n5.json")),
    ("mc_n2", include_str!("../presets/mc_n2.json")),
];

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let (_, text) = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::Config(format!("unknown preset {name:?}")))?;
        Self::from_json_str(text)
    }

    pub fn params(&self) -> Result<SystemParams> {
        self.system.as_ref().ok_or_else(|| Error::Config("missing \"system\" section".into()))?.to_params()
    }

    fn pulse_config(&self) -> Result<&PulseConfig> {
        self.pulses.as_ref().ok_or_else(|| Error::Config("missing \"pulses\" section".into()))
    }

    pub fn schedule(&self) -> Result<PulseSchedule> {
        let p = self.params()?;
        let pc = self.pulse_config()?;
        pc.schedule(pc.beta_us, p.omega_max)
    }

    /// Schedule with β replaced (sweeps); keeps explicit centers if given.
    pub fn schedule_for_beta(&self, beta: f64) -> Result<PulseSchedule> {
        let p = self.params()?;
        self.pulse_config()?.schedule(beta, p.omega_max)
    }

    pub fn run_options(&self) -> Result<RunOptions> {
        self.integration.run_options()
    }

    pub fn betas(&self) -> Result<&[f64]> {
        match &self.sweep {
            Some(s) if !s.betas_us.is_empty() => Ok(&s.betas_us),
            _ => Err(Error::Config("sweep needs a non-empty \"sweep.betas_us\" list".into())),
        }
    }

    pub fn atom(&self) -> Result<&AtomConfig> {
        self.atom.as_ref().ok_or_else(|| Error::Config("missing \"atom\" section".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        for (name, _) in PRESETS {
            let cfg = RunConfig::preset(name).unwrap();
            if cfg.system.is_some() {
                cfg.params().unwrap();
            }
            if cfg.pulses.is_some() {
                cfg.schedule().unwrap();
            }
        }
    }

    #[test]
    fn fig3_preset_values() {
        let p = RunConfig::preset("fig3_n5").unwrap().params().unwrap();
        assert_eq!(p.n_atoms, 5);
        assert!((p.delta_r - mhz(90.0)).abs() < 1e-12);
        assert!((p.delta_v - mhz(92.8)).abs() < 1e-12);
        assert!((p.omega_max - mhz(10.0)).abs() < 1e-12);
        assert!((p.comp_v - p.stark_shift_per_v()).abs() < 1e-12);
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = r#"{"mode": "dark", "colour": 3}"#;
        assert!(matches!(RunConfig::from_json_str(text), Err(Error::Config(_))));
        let text = r#"{"mode": "evolve", "system": {"n_atoms": 2, "bogus": 1}}"#;
        assert!(RunConfig::from_json_str(text).unwrap_err().is_config_error());
    }

    #[test]
    fn explicit_compensation_wins() {
        let mut cfg = RunConfig::preset("fig3_n5").unwrap();
        cfg.system.as_mut().unwrap().comp_v_mhz = Some(0.0);
        assert_eq!(cfg.params().unwrap().comp_v, 0.0);
    }
}
