//! State diagnostics: collective populations, the single-atom reduced
//! density matrix, its von Neumann entropy, and the GHZ fidelity.

use nalgebra::{Matrix6, SymmetricEigen};
use num_complex::Complex64;

use crate::basis::{collective_transition, BasisIndex, Level, Occupation};
use crate::dynamics::TrajectoryRecord;
use crate::error::{Error, Result};

/// Reduced density matrix of one atom over (g, e, r, v, q, u).
#[derive(Debug, Clone, PartialEq)]
pub struct SingleAtomDensity(pub Matrix6<Complex64>);

impl SingleAtomDensity {
    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn eigenvalues(&self) -> [f64; 6] {
        let eig = SymmetricEigen::new(self.0);
        let mut out = [0.0; 6];
        for (o, v) in out.iter_mut().zip(eig.eigenvalues.iter()) {
            *o = *v;
        }
        out
    }
}

fn norm_sq(psi: &[Complex64]) -> f64 {
    psi.iter().map(|a| a.norm_sqr()).sum()
}

/// Precomputed index lists for repeated evaluation on one basis.
#[derive(Debug, Clone)]
pub struct Diagnostics {
    n_atoms: u32,
    all_r: Vec<usize>,
    all_v: Vec<usize>,
    ghz_r: Option<usize>,
    ghz_v: Option<usize>,
    photons: Vec<f64>,
    /// (target, source, μ, ν, factor): ⟨target| a_ν† a_μ |source⟩ = factor,
    /// contributing to ρ₁(μ, ν).
    transitions: Vec<(usize, usize, usize, usize, f64)>,
}

impl Diagnostics {
    pub fn new(basis: &BasisIndex) -> Self {
        let n_atoms = basis.n_atoms();
        let mut all_r = Vec::new();
        let mut all_v = Vec::new();
        let mut transitions = Vec::new();
        for (i, occ) in basis.states().iter().enumerate() {
            if occ.count(Level::R) == n_atoms {
                all_r.push(i);
            }
            if occ.count(Level::V) == n_atoms {
                all_v.push(i);
            }
            for mu in Level::ALL {
                for nu in Level::ALL {
                    if let Some((target, f)) = collective_transition(occ, mu, nu) {
                        if let Some(j) = basis.find(&target) {
                            transitions.push((j, i, mu.index(), nu.index(), f));
                        }
                    }
                }
            }
        }
        Self {
            n_atoms,
            all_r,
            all_v,
            ghz_r: basis.find(&Occupation::all_in(Level::R, n_atoms)),
            ghz_v: basis.find(&Occupation::all_in(Level::V, n_atoms)),
            photons: basis.states().iter().map(|o| o.n as f64).collect(),
            transitions,
        }
    }

    /// (ρ_R, ρ_V), each summed over photon numbers, for the normalized state.
    pub fn populations(&self, psi: &[Complex64]) -> (f64, f64) {
        let norm = norm_sq(psi);
        let pop = |idx: &[usize]| idx.iter().map(|&i| psi[i].norm_sqr()).sum::<f64>() / norm;
        (pop(&self.all_r), pop(&self.all_v))
    }

    pub fn photon_number(&self, psi: &[Complex64]) -> f64 {
        psi.iter().zip(&self.photons).map(|(a, n)| a.norm_sqr() * n).sum::<f64>() / norm_sq(psi)
    }

    pub fn reduced_density(&self, psi: &[Complex64]) -> SingleAtomDensity {
        let scale = 1.0 / (norm_sq(psi) * self.n_atoms as f64);
        let mut rho = Matrix6::<Complex64>::zeros();
        for &(target, source, mu, nu, f) in &self.transitions {
            rho[(mu, nu)] += psi[target].conj() * psi[source] * f;
        }
        SingleAtomDensity(rho * Complex64::new(scale, 0.0))
    }

    /// max over φ of |⟨GHZ_φ|ψ⟩|² for the normalized state, with
    /// |GHZ_φ⟩ = (|R=N;0⟩ + e^{iφ}|V=N;0⟩)/√2.
    pub fn ghz_overlap(&self, psi: &[Complex64]) -> f64 {
        let amp = |i: Option<usize>| i.map(|i| psi[i].norm()).unwrap_or(0.0);
        let (a, b) = (amp(self.ghz_r), amp(self.ghz_v));
        0.5 * (a + b) * (a + b) / norm_sq(psi)
    }
}

pub fn collective_populations(psi: &[Complex64], basis: &BasisIndex) -> (f64, f64) {
    Diagnostics::new(basis).populations(psi)
}

pub fn reduced_density(psi: &[Complex64], basis: &BasisIndex) -> SingleAtomDensity {
    Diagnostics::new(basis).reduced_density(psi)
}

/// Eigenvalues below this are treated as rounding noise.
pub const EIGENVALUE_FLOOR: f64 = -1e-12;

/// −Σ λ ln λ in nats, 0 ln 0 = 0.
pub fn entropy(rho: &SingleAtomDensity) -> f64 {
    rho.eigenvalues()
        .iter()
        .map(|&l| {
            debug_assert!(l >= EIGENVALUE_FLOOR * 1e3, "reduced density has eigenvalue {l}");
            if l > 0.0 {
                -l * l.ln()
            } else {
                0.0
            }
        })
        .sum()
}

/// Survival probability times the phase-optimized GHZ overlap of the
/// final conditioned state.
pub fn ghz_fidelity(record: &TrajectoryRecord, basis: &BasisIndex) -> Result<f64> {
    let psi = record.final_state.as_ref().ok_or(Error::MissingFinalState)?;
    let last = record.samples.last().ok_or(Error::MissingFinalState)?;
    let survival = 1.0 - last.p_e - last.p_rv - last.p_kappa;
    Ok(survival * Diagnostics::new(basis).ghz_overlap(psi))
}
