//! Subcommand implementations behind the `sim` binary. Each command reads a
//! [`RunConfig`], writes its data files into an output directory and
//! returns a JSON-serializable summary.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::ghz_fidelity;
use crate::basis::{BasisIndex, Enumeration, Occupation};
use crate::config::{AtomConfig, Mode, RunConfig};
use crate::darkstate::{
    build_dark_system, dark_state_connection_check, solve_dark_space, verify_closure, ConnectionReport,
};
use crate::dynamics::{evolve_nojump, run_ensemble, EnsembleSummary, Model, Sample, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_h_ac, eigen_potentials, PulseSchedule, SystemParams};
use crate::rydatom::{
    cavity_decay, coupling_rate, dipole_matrix_element, field_per_photon, transition_frequency, DefectModel,
};
use crate::units::{to_mhz, BOHR_RADIUS, ELEMENTARY_CHARGE};

/// Command-line values that replace config entries.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub trajectories: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(s) = self.seed {
            cfg.ensemble.master_seed = s;
        }
        if let Some(w) = self.workers {
            cfg.ensemble.workers = w;
        }
        if let Some(n) = self.trajectories {
            cfg.ensemble.trajectories = n;
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub const TRAJECTORY_HEADER: [&str; 9] = ["t_us", "norm", "rho_R", "rho_V", "S", "P_e", "P_rv", "P_kappa", "n_exp"];

fn sample_row(s: &Sample) -> [String; 9] {
    [s.t, s.norm, s.rho_r, s.rho_v, s.entropy, s.p_e, s.p_rv, s.p_kappa, s.n_photons].map(|x| x.to_string())
}

pub fn write_trajectory_csv(path: &Path, record: &TrajectoryRecord) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(TRAJECTORY_HEADER)?;
    for s in &record.samples {
        w.write_record(sample_row(s))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Fully resolved parameters in internal units, embedded in every summary.
#[derive(Debug, Clone, Serialize)]
pub struct ParamsEcho {
    pub units: &'static str,
    pub params: Option<SystemParams>,
    pub schedule: Option<PulseSchedule>,
}

fn echo(cfg: &RunConfig) -> ParamsEcho {
    ParamsEcho {
        units: "angular frequencies in rad/us, times in us",
        params: cfg.params().ok(),
        schedule: cfg.schedule().ok(),
    }
}

fn out_path(out: &Path, cfg: &RunConfig, suffix: &str) -> PathBuf {
    out.join(format!("{}_{suffix}", cfg.name))
}

#[derive(Debug, Clone, Serialize)]
pub struct DipoleReport {
    pub atom: AtomConfig,
    pub omega_qr_ghz: f64,
    pub omega_vu_ghz: f64,
    /// ω_qr − ω_vu.
    pub delta_omega_mhz: f64,
    pub field_per_photon_v_per_m: f64,
    pub dipole_qr_ea0: f64,
    pub dipole_vu_ea0: f64,
    pub g_qr_mhz: f64,
    pub g_uv_mhz: f64,
    /// ω_c/Q when a quality factor is configured.
    pub kappa_from_quality_mhz: Option<f64>,
}

pub fn cmd_dipole(cfg: &RunConfig, out: &Path) -> Result<DipoleReport> {
    let atom = cfg.atom()?;
    let model = match &atom.species_file {
        Some(path) => DefectModel::load(path)?,
        None => DefectModel::rubidium87(),
    };
    let [r, q, v, u] = atom.levels()?;
    let geom = atom.cavity.geometry()?;
    let field = field_per_photon(&geom);
    let d_qr = dipole_matrix_element(&q, &r, &model)?;
    let d_vu = dipole_matrix_element(&v, &u, &model)?;
    let ghz = |w: f64| to_mhz(w) * 1e-3;
    let omega_qr = transition_frequency(&model, &q, &r)?;
    let omega_vu = transition_frequency(&model, &v, &u)?;
    let ea0 = ELEMENTARY_CHARGE * BOHR_RADIUS;
    let report = DipoleReport {
        atom: atom.clone(),
        omega_qr_ghz: ghz(omega_qr),
        omega_vu_ghz: ghz(omega_vu),
        delta_omega_mhz: to_mhz(omega_qr - omega_vu),
        field_per_photon_v_per_m: field,
        dipole_qr_ea0: d_qr / ea0,
        dipole_vu_ea0: d_vu / ea0,
        g_qr_mhz: to_mhz(coupling_rate(d_qr, field)),
        g_uv_mhz: to_mhz(coupling_rate(d_vu, field)),
        kappa_from_quality_mhz: atom.cavity.quality.map(|_| to_mhz(cavity_decay(&geom))),
    };
    write_json(&out_path(out, cfg, "dipole.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct PotentialsReport {
    pub config: ParamsEcho,
    pub basis_dim: usize,
    pub rows: usize,
    pub csv: PathBuf,
}

pub fn cmd_potentials(cfg: &RunConfig, out: &Path) -> Result<PotentialsReport> {
    let params = cfg.params()?;
    let n = params.n_atoms;
    let basis = BasisIndex::enumerate(n, params.n_max, Enumeration::Full)?;
    let h = build_h_ac(&params, &basis)?;
    let csv_path = out_path(out, cfg, "potentials.csv");
    let mut w = csv::Writer::from_writer(create(&csv_path)?);
    w.write_record(["R_i", "V_i", "shift_MHz", "weight"])?;
    let mut rows = 0;
    for r in 0..=n {
        for v in 0..=(n - r) {
            let pot = eigen_potentials(&h, &basis, &Occupation::new(n - r - v, 0, r, v, 0, 0, 0), &params)?;
            for level in &pot.levels {
                w.write_record([r.to_string(), v.to_string(), to_mhz(level.shift).to_string(), level.weight.to_string()])?;
                rows += 1;
            }
        }
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))?;
    let report = PotentialsReport { config: echo(cfg), basis_dim: basis.len(), rows, csv: csv_path };
    write_json(&out_path(out, cfg, "potentials.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolveReport {
    pub config: ParamsEcho,
    pub basis_dim: usize,
    pub final_sample: Sample,
    pub fidelity: f64,
    pub steps_accepted: u64,
    pub steps_rejected: u64,
    pub wall_time_s: f64,
}

/// No-jump run of one configuration; returns the model, record and F.
pub fn evolve(params: SystemParams, schedule: PulseSchedule, cfg: &RunConfig) -> Result<(Model, TrajectoryRecord, f64)> {
    let model = Model::new(params, schedule)?;
    let record = evolve_nojump(&model, &cfg.run_options()?)?;
    let fidelity = ghz_fidelity(&record, &model.basis)?;
    Ok((model, record, fidelity))
}

pub fn cmd_evolve(cfg: &RunConfig, out: &Path) -> Result<EvolveReport> {
    let start = Instant::now();
    let (model, record, fidelity) = evolve(cfg.params()?, cfg.schedule()?, cfg)?;
    write_trajectory_csv(&out_path(out, cfg, "evolve.csv"), &record)?;
    let report = EvolveReport {
        config: echo(cfg),
        basis_dim: model.dim(),
        final_sample: *record.last(),
        fidelity,
        steps_accepted: record.steps_accepted,
        steps_rejected: record.steps_rejected,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    write_json(&out_path(out, cfg, "evolve.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub beta_us: f64,
    /// Final sample, absent if the point failed.
    pub last: Option<Sample>,
    pub fidelity: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub config: ParamsEcho,
    pub rows: Vec<SweepRow>,
    pub wall_time_s: f64,
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParam(format!("thread pool: {e}")))
}

/// Independent no-jump runs over the β grid, computed concurrently and
/// returned in grid order.
pub fn sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    let params = cfg.params()?;
    let betas = cfg.betas()?.to_vec();
    let run = |beta: f64| -> Result<(Sample, f64)> {
        let (_, rec, f) = evolve(params, cfg.schedule_for_beta(beta)?, cfg)?;
        Ok((*rec.last(), f))
    };
    let rows = thread_pool(cfg.ensemble.workers)?.install(|| {
        betas
            .par_iter()
            .map(|&beta| match run(beta) {
                Ok((s, f)) => SweepRow { beta_us: beta, last: Some(s), fidelity: Some(f), error: None },
                Err(e) => SweepRow { beta_us: beta, last: None, fidelity: None, error: Some(e.to_string()) },
            })
            .collect()
    });
    Ok(rows)
}

pub fn cmd_sweep(cfg: &RunConfig, out: &Path) -> Result<SweepReport> {
    let start = Instant::now();
    let rows = sweep(cfg)?;
    let csv_path = out_path(out, cfg, "sweep.csv");
    let mut w = csv::Writer::from_writer(create(&csv_path)?);
    w.write_record(["beta_us", "rho_R", "rho_V", "S", "P_e", "P_rv", "P_kappa", "F", "error"])?;
    for row in &rows {
        let values = match (&row.last, row.fidelity) {
            (Some(s), Some(f)) => [s.rho_r, s.rho_v, s.entropy, s.p_e, s.p_rv, s.p_kappa, f],
            _ => [f64::NAN; 7],
        };
        let mut record = vec![row.beta_us.to_string()];
        record.extend(values.iter().map(f64::to_string));
        record.push(row.error.clone().unwrap_or_default());
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))?;
    let report = SweepReport { config: echo(cfg), rows, wall_time_s: start.elapsed().as_secs_f64() };
    write_json(&out_path(out, cfg, "sweep.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct McReport {
    pub config: ParamsEcho,
    pub basis_dim: usize,
    pub ensemble: EnsembleSummary,
    pub wall_time_s: f64,
}

pub fn cmd_mc(cfg: &RunConfig, out: &Path) -> Result<McReport> {
    let start = Instant::now();
    let model = Model::new(cfg.params()?, cfg.schedule()?)?;
    let options = cfg.run_options()?;
    let ens = cfg.ensemble.options();
    let summary = run_ensemble(&model, &options, &ens)?;

    let csv_path = out_path(out, cfg, "mc.csv");
    let mut w = csv::Writer::from_writer(create(&csv_path)?);
    w.write_record(["t_us", "rho_R", "rho_R_var", "rho_V", "rho_V_var", "S", "S_var", "n_exp", "n_exp_var"])?;
    for m in &summary.moments {
        let row = [m.t, m.rho_r, m.rho_r_var, m.rho_v, m.rho_v_var, m.entropy, m.entropy_var, m.n_photons, m.n_photons_var];
        w.write_record(row.map(|x| x.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))?;

    if cfg.ensemble.per_trajectory_csv {
        for i in 0..ens.trajectories {
            let rng = crate::dynamics::trajectory_rng(ens.master_seed, i as u64);
            let rec = crate::dynamics::run_trajectory_with_rng(&model, &options, rng)?;
            write_trajectory_csv(&out.join(format!("{}_traj_{i:05}.csv", cfg.name)), &rec)?;
        }
    }
    let report = McReport {
        config: echo(cfg),
        basis_dim: model.dim(),
        ensemble: summary,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    write_json(&out_path(out, cfg, "mc.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosureScan {
    pub n_atoms: u32,
    pub samples: usize,
    pub dimension_ok: usize,
    pub max_residual: f64,
    /// Smallest closure residual of a constraint row (should be large).
    pub min_negative_control: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DarkReport {
    pub config: ParamsEcho,
    /// Null-space dimension at peak Rabi frequencies for the configured N.
    pub dimension: usize,
    pub closure_residual: f64,
    pub scan: Vec<ClosureScan>,
    pub connection: Option<ConnectionReport>,
}

/// Dark-space dimension and closure residuals over random positive Rabi
/// triples in (0.1, 1]·scale.
pub fn closure_scan(n_atoms: u32, samples: usize, scale: f64, rng: &mut ChaCha8Rng) -> Result<ClosureScan> {
    let mut scan = ClosureScan { n_atoms, samples, dimension_ok: 0, max_residual: 0.0, min_negative_control: f64::INFINITY };
    for _ in 0..samples {
        let mut omega = || scale * (0.1 + 0.9 * (1.0 - rng.random::<f64>()));
        let sys = build_dark_system(n_atoms, omega(), omega(), omega())?;
        match solve_dark_space(&sys) {
            Ok(space) => {
                scan.dimension_ok += 1;
                for c in space.vectors() {
                    scan.max_residual = scan.max_residual.max(verify_closure(&c, &sys));
                }
            }
            Err(Error::DarkRank { .. }) => scan.max_residual = f64::INFINITY,
            Err(e) => return Err(e),
        }
        let row = sys.matrix.row(0).transpose();
        scan.min_negative_control = scan.min_negative_control.min(verify_closure(&row, &sys));
    }
    Ok(scan)
}

pub fn cmd_dark(cfg: &RunConfig, out: &Path) -> Result<DarkReport> {
    let params = cfg.params()?;
    if params.n_atoms > 12 {
        return Err(Error::Config(format!("dark-state analysis supports N <= 12, got {}", params.n_atoms)));
    }
    let w = params.omega_max;
    let sys = build_dark_system(params.n_atoms, w, w, w)?;
    let space = solve_dark_space(&sys)?;
    let closure_residual = space.vectors().map(|c| verify_closure(&c, &sys)).fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.ensemble.master_seed);
    let scan = (1..=cfg.dark.max_atoms)
        .map(|n| closure_scan(n, cfg.dark.random_triples, w.max(1.0), &mut rng))
        .collect::<Result<Vec<_>>>()?;

    let connection = match cfg.pulses {
        Some(_) => {
            let model = Model::new(params, cfg.schedule()?)?;
            Some(dark_state_connection_check(&model, &cfg.run_options()?)?)
        }
        None => None,
    };
    let report = DarkReport { config: echo(cfg), dimension: space.dim(), closure_residual, scan, connection };
    write_json(&out_path(out, cfg, "dark.json"), &report)?;
    Ok(report)
}

/// JSON-lines dump of the basis used for dynamics (reachable from the
/// ground state, including jumps).
pub fn cmd_basis(cfg: &RunConfig, out: &Path) -> Result<PathBuf> {
    let params = cfg.params()?;
    let seed = Occupation::ground(params.n_atoms);
    let basis =
        BasisIndex::enumerate(params.n_atoms, params.n_max, Enumeration::ReachableFrom { seed, include_jumps: true })?;
    let path = out_path(out, cfg, "basis.jsonl");
    let mut w = create(&path)?;
    basis.write_jsonl(&mut w).map_err(|e| Error::io(&path, e))?;
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Runs the command selected by `mode` and returns its summary as JSON.
pub fn run_mode(mode: Mode, cfg: &RunConfig, out: &Path) -> Result<serde_json::Value> {
    Ok(match mode {
        Mode::Dipole => serde_json::to_value(cmd_dipole(cfg, out)?)?,
        Mode::Potentials => serde_json::to_value(cmd_potentials(cfg, out)?)?,
        Mode::Evolve => serde_json::to_value(cmd_evolve(cfg, out)?)?,
        Mode::Sweep => serde_json::to_value(cmd_sweep(cfg, out)?)?,
        Mode::Mc => serde_json::to_value(cmd_mc(cfg, out)?)?,
        Mode::Dark => serde_json::to_value(cmd_dark(cfg, out)?)?,
    })
}
