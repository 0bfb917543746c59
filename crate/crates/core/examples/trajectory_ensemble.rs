//! Quantum-jump ensemble for two atoms: mean populations with standard
//! errors, jump counts per channel and the no-jump fraction.

use cavity_blockade::config::RunConfig;
use cavity_blockade::dynamics::{run_ensemble, EnsembleOptions, Model, RunOptions};

fn main() -> cavity_blockade::Result<()> {
    let cfg = RunConfig::preset("mc_n2")?;
    let model = Model::new(cfg.params()?, cfg.schedule()?)?;
    let opts = RunOptions { samples: 21, ..cfg.run_options()? };
    let trajectories = 400;
    let ens = run_ensemble(&model, &opts, &EnsembleOptions { trajectories, master_seed: cfg.ensemble.master_seed, workers: 0 })?;
    let m = trajectories as f64;
    for s in &ens.moments {
        let se = (s.rho_r_var / (m - 1.0)).sqrt();
        println!("t = {:>6.2}  rho_R = {:.4} ± {:.4}  rho_V = {:.4}", s.t, s.rho_r, se, s.rho_v);
    }
    for (kind, count) in ens.jumps {
        println!("{:>8}: {count} jumps", kind.label());
    }
    println!("no-jump fraction {:.3}, mean GHZ overlap {:.4}", ens.no_jump_fraction, ens.ghz_overlap);
    Ok(())
}
