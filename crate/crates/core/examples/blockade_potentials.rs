//! Cavity-induced energy shifts of every (R_i, V_i) configuration for five
//! atoms: pure states stay near zero, mixed ones are pushed away.

use cavity_blockade::basis::{BasisIndex, Enumeration, Occupation};
use cavity_blockade::hamiltonian::{build_h_ac, eigen_potentials, SystemParams};
use cavity_blockade::units::to_mhz;

fn main() -> cavity_blockade::Result<()> {
    let params = SystemParams { n_max: 5, ..SystemParams::five_atom_reference() }.with_stark_compensation();
    let n = params.n_atoms;
    let basis = BasisIndex::enumerate(n, params.n_max, Enumeration::Full)?;
    let h = build_h_ac(&params, &basis)?;
    println!("R_i V_i  dominant shift (MHz)  weight");
    for r in 0..=n {
        for v in 0..=(n - r) {
            let pot = eigen_potentials(&h, &basis, &Occupation::new(n - r - v, 0, r, v, 0, 0, 0), &params)?;
            let d = pot.dominant();
            println!("{r:>3} {v:>3}  {:>20.4}  {:.3}", to_mhz(d.shift), d.weight);
        }
    }
    Ok(())
}
