//! Eigen-potentials of the atom-cavity Hamiltonian: diagonalize the block
//! connected to a bare |R_i, V_i, 0, 0⟩|0⟩ configuration and report every
//! eigenvalue with its overlap on that configuration.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::SystemParams;
use crate::basis::{BasisIndex, Level, Occupation};
use crate::error::{Error, Result};
use crate::sparse::OperatorMatrix;

/// Largest block handed to the dense eigensolver.
pub const MAX_BLOCK_DIM: usize = 4096;

#[derive(Debug, Clone)]
pub struct BlockEigensystem {
    /// Basis indices of the block, ascending.
    pub states: Vec<usize>,
    pub eigenvalues: DVector<f64>,
    /// Columns are eigenvectors in block coordinates.
    pub eigenvectors: DMatrix<f64>,
}

/// Diagonalizes the connected component of `h` containing `start`.
/// `h` must be real symmetric (the atom-cavity Hamiltonian is).
pub fn block_eigensystem(h: &OperatorMatrix, start: usize) -> Result<BlockEigensystem> {
    let mut seen = vec![false; h.dim()];
    let mut states = Vec::new();
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(s) = queue.pop_front() {
        states.push(s);
        if states.len() > MAX_BLOCK_DIM {
            return Err(Error::Capacity { size: states.len(), limit: MAX_BLOCK_DIM });
        }
        for (c, v) in h.row(s) {
            if v.norm() != 0.0 && !seen[c] {
                seen[c] = true;
                queue.push_back(c);
            }
        }
    }
    states.sort_unstable();
    let dim = states.len();
    let mut local = vec![usize::MAX; h.dim()];
    for (k, &s) in states.iter().enumerate() {
        local[s] = k;
    }
    let mut dense = DMatrix::<f64>::zeros(dim, dim);
    for (k, &s) in states.iter().enumerate() {
        for (c, v) in h.row(s) {
            debug_assert!(v.im == 0.0, "block_eigensystem expects a real matrix");
            dense[(k, local[c])] += v.re;
        }
    }
    let eig = dense.symmetric_eigen();
    Ok(BlockEigensystem { states, eigenvalues: eig.eigenvalues, eigenvectors: eig.eigenvectors })
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenLevel {
    /// Eigenvalue minus the Stark reference of the initial state, rad/µs.
    pub shift: f64,
    /// |⟨eigenvector|initial⟩|².
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenPotential {
    pub r_initial: u32,
    pub v_initial: u32,
    /// Sorted by shift.
    pub levels: Vec<EigenLevel>,
}

impl EigenPotential {
    /// Level with the largest overlap on the initial configuration.
    pub fn dominant(&self) -> &EigenLevel {
        self.levels.iter().max_by(|a, b| a.weight.total_cmp(&b.weight)).expect("non-empty block")
    }

    pub fn total_weight(&self) -> f64 {
        self.levels.iter().map(|l| l.weight).sum()
    }
}

/// Eigen-potentials for one bare configuration with Q = U = n = 0. Shifts
/// are measured from the perturbative Stark energy −V_i |g_uv|²/Δ_v.
pub fn eigen_potentials(
    h_ac: &OperatorMatrix,
    basis: &BasisIndex,
    initial: &Occupation,
    params: &SystemParams,
) -> Result<EigenPotential> {
    if initial.count(Level::Q) != 0 || initial.count(Level::U) != 0 || initial.n != 0 {
        return Err(Error::InvalidParam(format!("initial state {initial} must have Q = U = n = 0")));
    }
    if h_ac.dim() != basis.len() {
        return Err(Error::BasisMismatch("operator and basis dimensions differ".into()));
    }
    let start = basis.require(initial)?;
    let block = block_eigensystem(h_ac, start)?;
    let k0 = block.states.binary_search(&start).expect("start is in its own block");
    let stark_reference = -(initial.count(Level::V) as f64) * params.stark_shift_per_v();
    let mut levels: Vec<EigenLevel> = (0..block.states.len())
        .map(|k| EigenLevel {
            shift: block.eigenvalues[k] - stark_reference,
            weight: block.eigenvectors[(k0, k)].powi(2),
        })
        .collect();
    levels.sort_by(|a, b| a.shift.total_cmp(&b.shift));
    Ok(EigenPotential { r_initial: initial.count(Level::R), v_initial: initial.count(Level::V), levels })
}
