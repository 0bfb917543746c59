//! Final loss channels against pulse width β for five atoms.

use cavity_blockade::cli::sweep;
use cavity_blockade::config::RunConfig;

fn main() -> cavity_blockade::Result<()> {
    let cfg = RunConfig::preset("fig4_n5")?;
    println!("{:>7} {:>7} {:>7} {:>7} {:>7}", "beta_us", "P_e", "P_rv", "P_kappa", "F");
    for row in sweep(&cfg)? {
        match (row.last, row.fidelity) {
            (Some(s), Some(f)) => {
                println!("{:>7.2} {:>7.4} {:>7.4} {:>7.4} {:>7.4}", row.beta_us, s.p_e, s.p_rv, s.p_kappa, f)
            }
            _ => println!("{:>7.2} failed: {}", row.beta_us, row.error.unwrap_or_default()),
        }
    }
    Ok(())
}
