use std::path::Path;
use std::process::{Command, Output};

use cavity_blockade::config::RunConfig;
use cavity_blockade::dynamics::{run_trajectory_with_rng, trajectory_rng, Model};
use serde_json::Value;

fn sim(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sim")).args(args).arg("--out").arg(out).output().unwrap()
}

fn summary(out: &Output) -> Value {
    assert!(out.status.success(), "sim failed: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write_config(dir: &Path, name: &str, body: &Value) -> String {
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(body).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn small_system(n_atoms: u32) -> Value {
    serde_json::json!({
        "n_atoms": n_atoms,
        "delta_r_mhz": 90.0,
        "delta_v_mhz": 92.8,
        "g_qr_mhz": 7.5,
        "g_uv_mhz": 10.4,
        "gamma_eg_mhz": 6.07,
        "gamma_r_mhz": 0.0004,
        "gamma_v_mhz": 0.0004,
        "kappa_mhz": 0.2,
        "omega_max_mhz": 10.0,
        "n_max": 2
    })
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_owned).collect();
    // Empty cells (the sweep's error column) read as NaN.
    let cell = |x: &str| if x.is_empty() { f64::NAN } else { x.parse().unwrap() };
    let rows = r.records().map(|rec| rec.unwrap().iter().map(cell).collect()).collect();
    (header, rows)
}

#[test]
fn dipole_preset() {
    let dir = tempfile::tempdir().unwrap();
    let s = summary(&sim(&["dipole", "--config", "preset:dipole"], dir.path()));
    let d = s["delta_omega_mhz"].as_f64().unwrap();
    let e = s["field_per_photon_v_per_m"].as_f64().unwrap();
    assert!((d - 2.8).abs() < 0.3, "δω = {d}");
    assert!((e - 0.37).abs() < 0.01, "ε_c = {e}");
    assert!(s["atom"]["cavity"]["d_um"].is_number());
    assert!(dir.path().join("dipole_dipole.json").exists());
}

#[test]
fn degenerate_dipole_request() {
    let dir = tempfile::tempdir().unwrap();
    let s67 = serde_json::json!({ "n": 67, "l": 0, "j": 0.5, "mj": 0.5 });
    let cfg = serde_json::json!({
        "mode": "dipole",
        "name": "same",
        "atom": {
            "r": s67, "q": s67, "v": s67, "u": s67,
            "cavity": { "d_um": 10.0, "length_cm": 1.0, "frequency_ghz": 11.9 }
        }
    });
    let path = write_config(dir.path(), "same", &cfg);
    let s = summary(&sim(&["run", "--config", &path], dir.path()));
    assert_eq!(s["omega_qr_ghz"].as_f64(), Some(0.0));
    assert_eq!(s["g_qr_mhz"].as_f64().map(f64::abs), Some(0.0));
}

#[test]
fn single_atom_potentials_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = serde_json::json!({ "mode": "potentials", "name": "one", "system": small_system(1) });
    let path = write_config(dir.path(), "one", &cfg);
    summary(&sim(&["potentials", "--config", &path], dir.path()));
    let (header, rows) = read_csv(&dir.path().join("one_potentials.csv"));
    assert_eq!(header, ["R_i", "V_i", "shift_MHz", "weight"]);
    let initials: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[1])).collect();
    for key in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)] {
        let block: Vec<&Vec<f64>> = rows.iter().filter(|r| (r[0], r[1]) == key).collect();
        assert!(!block.is_empty(), "{key:?} missing from {initials:?}");
        let total: f64 = block.iter().map(|r| r[3]).sum();
        assert!((total - 1.0).abs() < 1e-10);
        let dominant = block.iter().max_by(|a, b| a[3].total_cmp(&b[3])).unwrap();
        assert!(dominant[2].abs() < 0.05, "{key:?} shift {} MHz", dominant[2]);
    }
}

fn evolve_config(name: &str) -> Value {
    serde_json::json!({
        "mode": "evolve",
        "name": name,
        "system": small_system(2),
        "pulses": { "beta_us": 1.5 },
        "integration": { "samples": 60 },
        "sweep": { "betas_us": [1.5] },
        "ensemble": { "trajectories": 24, "master_seed": 77 }
    })
}

#[test]
fn evolve_bookkeeping_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "ev", &evolve_config("ev"));
    let a = summary(&sim(&["evolve", "--config", &path], dir.path()));
    let csv_path = dir.path().join("ev_evolve.csv");
    let first = std::fs::read(&csv_path).unwrap();
    let (header, rows) = read_csv(&csv_path);
    assert_eq!(header, ["t_us", "norm", "rho_R", "rho_V", "S", "P_e", "P_rv", "P_kappa", "n_exp"]);
    for r in &rows {
        assert!((r[1] + r[5] + r[6] + r[7] - 1.0).abs() < 1e-6);
    }
    let b = summary(&sim(&["evolve", "--config", &path], dir.path()));
    assert_eq!(first, std::fs::read(&csv_path).unwrap());
    assert_eq!(a["final_sample"], b["final_sample"]);
    assert!(a["config"]["params"]["delta_v"].as_f64().unwrap() > 500.0, "echo is in rad/us");
}

#[test]
fn single_point_sweep_equals_evolve() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "pt", &evolve_config("pt"));
    let ev = summary(&sim(&["evolve", "--config", &path], dir.path()));
    summary(&sim(&["sweep", "--config", &path], dir.path()));
    let (header, rows) = read_csv(&dir.path().join("pt_sweep.csv"));
    assert_eq!(header, ["beta_us", "rho_R", "rho_V", "S", "P_e", "P_rv", "P_kappa", "F", "error"].map(String::from));
    let last = &ev["final_sample"];
    let row = &rows[0];
    assert_eq!(row[1], last["rho_r"].as_f64().unwrap());
    assert_eq!(row[4], last["p_e"].as_f64().unwrap());
    assert_eq!(row[7], ev["fidelity"].as_f64().unwrap());
}

fn without_wall_time(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_time_s");
    v
}

#[test]
fn ensemble_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "mc", &evolve_config("mc"));
    let (d1, d3) = (dir.path().join("w1"), dir.path().join("w3"));
    let a = summary(&sim(&["mc", "--config", &path, "--workers", "1"], &d1));
    let b = summary(&sim(&["mc", "--config", &path, "--workers", "3"], &d3));
    assert_eq!(without_wall_time(a), without_wall_time(b));
    assert_eq!(std::fs::read(d1.join("mc_mc.csv")).unwrap(), std::fs::read(d3.join("mc_mc.csv")).unwrap());
}

#[test]
fn one_trajectory_is_the_derived_stream() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "one", &evolve_config("one"));
    summary(&sim(&["mc", "--config", &path, "--traj", "1", "--seed", "4242"], dir.path()));
    let (_, rows) = read_csv(&dir.path().join("one_mc.csv"));
    let cfg = RunConfig::load(&path).unwrap();
    let model = Model::new(cfg.params().unwrap(), cfg.schedule().unwrap()).unwrap();
    let rec = run_trajectory_with_rng(&model, &cfg.run_options().unwrap(), trajectory_rng(4242, 0)).unwrap();
    assert_eq!(rows.len(), rec.samples.len());
    for (row, s) in rows.iter().zip(&rec.samples) {
        assert_eq!(row[1], s.rho_r);
        assert_eq!(row[3], s.rho_v);
    }
}

#[test]
fn dark_single_atom() {
    let dir = tempfile::tempdir().unwrap();
    let mut system = small_system(1);
    for k in ["gamma_eg_mhz", "gamma_r_mhz", "gamma_v_mhz", "kappa_mhz"] {
        system[k] = 0.0.into();
    }
    let cfg = serde_json::json!({
        "mode": "dark", "name": "d1", "system": system, "dark": { "random_triples": 10, "max_atoms": 3 }
    });
    let path = write_config(dir.path(), "d1", &cfg);
    let s = summary(&sim(&["dark", "--config", &path], dir.path()));
    assert_eq!(s["dimension"], 2);
    assert!(s["closure_residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(s["scan"].as_array().unwrap().len(), 3);
    assert!(s["connection"].is_null());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut bad = evolve_config("bad");
    bad["system"]["delta_r"] = 90.0.into();
    let unknown_key = write_config(dir.path(), "unknown", &bad);
    let mut negative = evolve_config("neg");
    negative["pulses"]["beta_us"] = (-1.0).into();
    let negative = write_config(dir.path(), "neg", &negative);
    let missing = dir.path().join("nope.json");
    for args in [
        vec!["evolve", "--config", &unknown_key],
        vec!["evolve", "--config", &negative],
        vec!["evolve", "--config", missing.to_str().unwrap()],
        vec!["evolve", "--config", "preset:no_such_preset"],
        vec!["sweep", "--config", "preset:fig3_n5"],
    ] {
        let out = sim(&args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn presets_run_through_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let s = summary(&sim(&["basis", "--config", "preset:mc_n2"], dir.path()));
    let path = s["basis"].as_str().unwrap();
    let lines = std::fs::read_to_string(path).unwrap();
    assert!(lines.lines().count() > 10);
    for line in lines.lines() {
        let _: Value = serde_json::from_str(line).unwrap();
    }
}
