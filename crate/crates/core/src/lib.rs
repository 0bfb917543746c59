//! Cavity-mediated asymmetric Rydberg blockade and GHZ-state preparation by
//! adiabatic rapid passage.
//!
//! The crate models N atoms with levels g, e, r, v, q, u in the symmetric
//! (Dicke) subspace, coupled to one microwave cavity mode that drives the
//! near-resonant r→q and v→u transitions. Laser pulses take the ensemble
//! from the ground state to (|r…r⟩ + |v…v⟩)/√2 through collective dark
//! states; mixed r/v configurations are shifted out of resonance by the
//! cavity.
//!
//! Modules follow the workflow: atomic data and couplings ([`rydatom`]),
//! the collective basis ([`basis`]), Hamiltonians and eigen-potentials
//! ([`hamiltonian`]), dissipative dynamics ([`dynamics`]), diagnostics
//! ([`analysis`]), and the dark-state algebra ([`darkstate`]).

pub mod analysis;
pub mod basis;
pub mod cli;
pub mod config;
pub mod darkstate;
pub mod dynamics;
pub mod error;
pub mod hamiltonian;
pub mod rydatom;
pub mod sparse;
pub mod units;

pub use error::{Error, Result};
