//! Two-dimensional dark space of the laser couplings for one to eight
//! atoms, and how closely the evolving state follows it.

use cavity_blockade::config::RunConfig;
use cavity_blockade::darkstate::{build_dark_system, dark_state_connection_check, solve_dark_space, verify_closure};
use cavity_blockade::dynamics::Model;

fn main() -> cavity_blockade::Result<()> {
    for n in 1..=8 {
        let sys = build_dark_system(n, 1.0, 0.6, 0.8)?;
        let space = solve_dark_space(&sys)?;
        let worst = space.vectors().map(|c| verify_closure(&c, &sys)).fold(0.0, f64::max);
        println!("N = {n}: dark dimension {}, closure residual {worst:.1e}", space.dim());
    }
    let cfg = RunConfig::preset("dark_n5")?;
    let model = Model::new(cfg.params()?, cfg.schedule()?)?;
    let rep = dark_state_connection_check(&model, &cfg.run_options()?)?;
    println!("minimum dark-space projection {:.3} at t = {:.2} us", rep.min_projection, rep.t_at_min);
    Ok(())
}
