//! Transition frequencies, dipole matrix elements and vacuum couplings for
//! the Rb87 Rydberg levels of the dipole preset.

use cavity_blockade::cli::cmd_dipole;
use cavity_blockade::config::RunConfig;

fn main() -> cavity_blockade::Result<()> {
    let cfg = RunConfig::preset("dipole")?;
    let out = std::env::temp_dir();
    let rep = cmd_dipole(&cfg, &out)?;
    println!("ω_qr/2π = {:.4} GHz, ω_vu/2π = {:.4} GHz", rep.omega_qr_ghz, rep.omega_vu_ghz);
    println!("δω/2π   = {:.3} MHz", rep.delta_omega_mhz);
    println!("ε_c     = {:.4} V/m", rep.field_per_photon_v_per_m);
    println!("d_qr = {:.1} ea0, d_vu = {:.1} ea0", rep.dipole_qr_ea0, rep.dipole_vu_ea0);
    println!("g_qr/2π = {:.3} MHz, g_uv/2π = {:.3} MHz", rep.g_qr_mhz, rep.g_uv_mhz);
    if let Some(k) = rep.kappa_from_quality_mhz {
        println!("κ/2π from ω_c/Q = {:.2} kHz", k * 1e3);
    }
    Ok(())
}
