//! Atom-cavity and atom-laser Hamiltonians in the collective basis.
//!
//! The cavity coupling is written in its energy-conserving rotating-wave
//! form: an atom going v → u emits a cavity photon, an atom going r → q
//! absorbs one. Together with the diagonal Δ_v U − Δ_r Q this conserves
//! n + Q − U. All quantities are in rad/µs.

mod potentials;
mod pulse;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use potentials::{block_eigensystem, eigen_potentials, BlockEigensystem, EigenPotential, MAX_BLOCK_DIM};
pub use pulse::{pulse_amplitude, Pulse, PulseSchedule, SPAN_MARGIN};

use crate::basis::{collective_transition, photon_annihilate, photon_create, BasisIndex, Level};
use crate::error::{Error, Result};
use crate::sparse::OperatorMatrix;
use crate::units::mhz;

/// Physical rates, detunings and truncation of one simulation (rad/µs).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub n_atoms: u32,
    /// Δ_r = ω_c − ω_qr
    pub delta_r: f64,
    /// Δ_v = ω_c − ω_vu
    pub delta_v: f64,
    pub g_qr: f64,
    pub g_uv: f64,
    pub gamma_eg: f64,
    pub gamma_r: f64,
    pub gamma_v: f64,
    pub kappa: f64,
    /// Laser detuning applied per atom in |r⟩.
    pub comp_r: f64,
    /// Laser detuning applied per atom in |v⟩.
    pub comp_v: f64,
    pub omega_max: f64,
    pub n_max: u32,
}

impl SystemParams {
    /// N = 5, Δ_r = 2π×90 MHz, Δ_v = 2π×92.8 MHz with the decay rates and
    /// couplings used throughout; Stark compensation on.
    pub fn five_atom_reference() -> Self {
        Self {
            n_atoms: 5,
            delta_r: mhz(90.0),
            delta_v: mhz(92.8),
            g_qr: mhz(7.5),
            g_uv: mhz(10.4),
            gamma_eg: mhz(6.07),
            gamma_r: mhz(0.4e-3),
            gamma_v: mhz(0.4e-3),
            kappa: mhz(0.2),
            comp_r: 0.0,
            comp_v: 0.0,
            omega_max: mhz(10.0),
            n_max: 2,
        }
        .with_stark_compensation()
    }

    /// N = 10, Δ_r = 2π×110 MHz, Δ_v = 2π×112.8 MHz.
    pub fn ten_atom_reference() -> Self {
        Self { n_atoms: 10, delta_r: mhz(110.0), delta_v: mhz(112.8), ..Self::five_atom_reference() }
            .with_stark_compensation()
    }

    /// Second-order cavity Stark shift of one |v⟩ atom is −|g_uv|²/Δ_v;
    /// this returns the detuning +|g_uv|²/Δ_v that cancels it.
    pub fn stark_shift_per_v(&self) -> f64 {
        self.g_uv * self.g_uv / self.delta_v
    }

    pub fn with_stark_compensation(mut self) -> Self {
        self.comp_v = self.stark_shift_per_v();
        self.comp_r = 0.0;
        self
    }

    pub fn without_decay(mut self) -> Self {
        self.gamma_eg = 0.0;
        self.gamma_r = 0.0;
        self.gamma_v = 0.0;
        self.kappa = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_atoms == 0 {
            return Err(Error::InvalidParam("n_atoms must be at least 1".into()));
        }
        let non_negative = [
            ("g_qr", self.g_qr),
            ("g_uv", self.g_uv),
            ("gamma_eg", self.gamma_eg),
            ("gamma_r", self.gamma_r),
            ("gamma_v", self.gamma_v),
            ("kappa", self.kappa),
            ("omega_max", self.omega_max),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParam(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        for (name, v) in [("delta_r", self.delta_r), ("delta_v", self.delta_v), ("comp_r", self.comp_r), ("comp_v", self.comp_v)] {
            if !v.is_finite() {
                return Err(Error::InvalidParam(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    /// Soft checks: the dispersive picture assumes |Δ| ≫ |g|.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let g = self.g_qr.max(self.g_uv);
        for (name, d) in [("delta_r", self.delta_r), ("delta_v", self.delta_v)] {
            if d.abs() < 5.0 * g {
                out.push(format!("|{name}| = {:.3} rad/us is not much larger than g = {:.3} rad/us", d.abs(), g));
            }
        }
        out
    }
}

fn check_basis(params: &SystemParams, basis: &BasisIndex) -> Result<()> {
    if basis.n_atoms() != params.n_atoms || basis.n_max() != params.n_max {
        return Err(Error::BasisMismatch(format!(
            "basis has N = {}, n_max = {}; params have N = {}, n_max = {}",
            basis.n_atoms(),
            basis.n_max(),
            params.n_atoms,
            params.n_max
        )));
    }
    Ok(())
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Atom-cavity Hamiltonian. Couplings leading outside the basis (photon
/// number above n_max, or filtered states) are dropped.
pub fn build_h_ac(params: &SystemParams, basis: &BasisIndex) -> Result<OperatorMatrix> {
    check_basis(params, basis)?;
    let mut triplets = Vec::new();
    for (i, occ) in basis.states().iter().enumerate() {
        let diag = params.delta_v * occ.count(Level::U) as f64 - params.delta_r * occ.count(Level::Q) as f64;
        if diag != 0.0 {
            triplets.push((i, i, real(diag)));
        }
        // r → q, absorbing a photon
        if let Some((moved, dicke)) = collective_transition(occ, Level::R, Level::Q) {
            if let Some((target, ladder)) = photon_annihilate(&moved) {
                if let Some(j) = basis.find(&target) {
                    let v = real(params.g_qr * dicke * ladder);
                    triplets.push((j, i, v));
                    triplets.push((i, j, v.conj()));
                }
            }
        }
        // v → u, emitting a photon
        if let Some((moved, dicke)) = collective_transition(occ, Level::V, Level::U) {
            let (target, ladder) = photon_create(&moved);
            if let Some(j) = basis.find(&target) {
                let v = real(params.g_uv * dicke * ladder);
                triplets.push((j, i, v));
                triplets.push((i, j, v.conj()));
            }
        }
    }
    Ok(OperatorMatrix::from_triplets(basis.len(), triplets))
}

/// (1/2)(Σ_j |to⟩⟨from|_j + H.c.) for one laser transition, unit Rabi frequency.
fn laser_coupling(basis: &BasisIndex, from: Level, to: Level) -> OperatorMatrix {
    let mut triplets = Vec::new();
    for (i, occ) in basis.states().iter().enumerate() {
        if let Some((moved, dicke)) = collective_transition(occ, from, to) {
            if let Some(j) = basis.find(&moved) {
                let v = real(0.5 * dicke);
                triplets.push((j, i, v));
                triplets.push((i, j, v));
            }
        }
    }
    OperatorMatrix::from_triplets(basis.len(), triplets)
}

/// The three laser-coupling structures; H_AL = Ω_ge·ge + Ω_er·er + Ω_ev·ev.
#[derive(Debug, Clone)]
pub struct LaserCouplings {
    pub ge: OperatorMatrix,
    pub er: OperatorMatrix,
    pub ev: OperatorMatrix,
}

impl LaserCouplings {
    pub fn new(basis: &BasisIndex) -> Self {
        Self {
            ge: laser_coupling(basis, Level::G, Level::E),
            er: laser_coupling(basis, Level::E, Level::R),
            ev: laser_coupling(basis, Level::E, Level::V),
        }
    }

    pub fn at(&self, omegas: [f64; 3]) -> OperatorMatrix {
        let [ge, er, ev] = omegas;
        self.ge.linear_combination(real(ge), &self.er, real(er)).linear_combination(real(1.0), &self.ev, real(ev))
    }
}

/// Atom-laser Hamiltonian in the rotating-wave approximation.
pub fn build_h_al(omega_ge: f64, omega_er: f64, omega_ev: f64, basis: &BasisIndex) -> OperatorMatrix {
    LaserCouplings::new(basis).at([omega_ge, omega_er, omega_ev])
}

/// Diagonal laser detunings comp_r·R + comp_v·V.
pub fn compensation(params: &SystemParams, basis: &BasisIndex) -> OperatorMatrix {
    let diag: Vec<f64> = basis
        .states()
        .iter()
        .map(|o| params.comp_r * o.count(Level::R) as f64 + params.comp_v * o.count(Level::V) as f64)
        .collect();
    OperatorMatrix::from_diagonal(&diag)
}

/// H(t) = H_AC + H_AL(t) + D.
pub fn build_h_total(t: f64, params: &SystemParams, schedule: &PulseSchedule, basis: &BasisIndex) -> Result<OperatorMatrix> {
    let static_part = build_h_ac(params, basis)?.add(&compensation(params, basis));
    Ok(static_part.add(&LaserCouplings::new(basis).at(schedule.amplitudes(t))))
}
