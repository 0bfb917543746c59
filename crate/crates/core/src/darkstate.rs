//! Collective dark states of the laser Hamiltonian under an ideal
//! asymmetric blockade.
//!
//! The unknowns are the amplitudes on the 2N+1 blockade-allowed symmetric
//! states with no e or mixed-Rydberg occupation:
//! (G, 0, R, 0) for R = 0..N followed by (G, 0, 0, V) for V = 1..N.
//! Each row demands that one E = 1 state receives zero amplitude from the
//! laser couplings; there are 2N−1 of them.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::basis::{collective_transition, BasisIndex, Level, Occupation};
use crate::dynamics::{evolve_nojump, Model, RunOptions};
use crate::error::{Error, Result};

/// Null-space threshold relative to the largest singular value.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct DarkSystem {
    pub n_atoms: u32,
    /// (Ω_ge, Ω_er, Ω_ev) in rad/µs.
    pub omegas: [f64; 3],
    /// Allowed states in column order.
    pub unknowns: Vec<Occupation>,
    /// The E = 1 state each row protects.
    pub conditions: Vec<Occupation>,
    pub matrix: DMatrix<f64>,
}

impl DarkSystem {
    pub fn column_of(&self, occ: &Occupation) -> Option<usize> {
        self.unknowns.iter().position(|o| o == occ)
    }

    /// Columns of the all-ground, all-r and all-v states.
    pub fn endpoints(&self) -> (usize, usize, usize) {
        let n = self.n_atoms as usize;
        (0, n, 2 * n)
    }
}

pub fn allowed_states(n_atoms: u32) -> Vec<Occupation> {
    let r_branch = (0..=n_atoms).map(|r| Occupation::new(n_atoms - r, 0, r, 0, 0, 0, 0));
    let v_branch = (1..=n_atoms).map(|v| Occupation::new(n_atoms - v, 0, 0, v, 0, 0, 0));
    r_branch.chain(v_branch).collect()
}

pub fn build_dark_system(n_atoms: u32, omega_ge: f64, omega_er: f64, omega_ev: f64) -> Result<DarkSystem> {
    if n_atoms == 0 {
        return Err(Error::InvalidParam("dark system needs at least one atom".into()));
    }
    let omegas = [omega_ge, omega_er, omega_ev];
    if omegas.iter().any(|o| !o.is_finite()) {
        return Err(Error::InvalidParam(format!("non-finite Rabi frequency in {omegas:?}")));
    }
    if omegas.iter().all(|&o| o == 0.0) {
        return Err(Error::DegenerateDarkSystem);
    }
    let unknowns = allowed_states(n_atoms);
    let mut conditions: Vec<Occupation> = Vec::new();
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    for (col, occ) in unknowns.iter().enumerate() {
        for (from, omega) in [(Level::G, omega_ge), (Level::R, omega_er), (Level::V, omega_ev)] {
            let Some((target, f)) = collective_transition(occ, from, Level::E) else { continue };
            let row = match conditions.iter().position(|c| *c == target) {
                Some(r) => r,
                None => {
                    conditions.push(target);
                    conditions.len() - 1
                }
            };
            entries.push((row, col, omega * f));
        }
    }
    let mut matrix = DMatrix::zeros(conditions.len(), unknowns.len());
    for (r, c, v) in entries {
        matrix[(r, c)] += v;
    }
    debug_assert_eq!(conditions.len() as u32, 2 * n_atoms - 1);
    Ok(DarkSystem { n_atoms, omegas, unknowns, conditions, matrix })
}

#[derive(Debug, Clone)]
pub struct DarkSpace {
    /// Orthonormal columns spanning the null space.
    pub basis: DMatrix<f64>,
    /// All singular values, descending.
    pub singular_values: Vec<f64>,
}

impl DarkSpace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn vectors(&self) -> impl Iterator<Item = DVector<f64>> + '_ {
        self.basis.column_iter().map(|c| c.into_owned())
    }

    /// Squared norm of the projection of `c` (over the unknowns) onto the
    /// space.
    pub fn projection(&self, c: &DVector<f64>) -> f64 {
        (self.basis.transpose() * c).norm_squared()
    }
}

/// Smallest relative Rabi frequency used when balancing columns.
const BALANCE_FLOOR: f64 = 1e-12;

/// Column weights 1/(w_ge^G w_er^R w_ev^V) with w = |Ω|/max|Ω|. Along each
/// chain the dark amplitudes scale like the inverse of this, so the balanced
/// unknowns are all of comparable size and the null vectors come out with
/// componentwise, not just normwise, accuracy.
fn column_balance(sys: &DarkSystem) -> DVector<f64> {
    let top = sys.omegas.iter().fold(0.0f64, |m, o| m.max(o.abs()));
    let ln_w = sys.omegas.map(|o| if o == 0.0 { 0.0 } else { (o.abs() / top).max(BALANCE_FLOOR).ln() });
    let exps: Vec<f64> = sys
        .unknowns
        .iter()
        .map(|o| -(o.count(Level::G) as f64 * ln_w[0] + o.count(Level::R) as f64 * ln_w[1] + o.count(Level::V) as f64 * ln_w[2]))
        .collect();
    let max = exps.iter().fold(f64::NEG_INFINITY, |m, &e| m.max(e));
    DVector::from_iterator(exps.len(), exps.iter().map(|e| (e - max).exp()))
}

/// Right singular vectors of `m` padded to a square matrix, with singular
/// values, ordered by descending singular value.
fn square_svd(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let cols = m.ncols();
    let mut square = DMatrix::zeros(cols, cols);
    square.rows_mut(0, m.nrows()).copy_from(m);
    let svd = square.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let values = order.iter().map(|&k| svd.singular_values[k]).collect();
    let vectors = DMatrix::from_fn(cols, cols, |i, j| v_t[(order[j], i)]);
    (values, vectors)
}

/// Null vector of the system restricted to the ground state plus one
/// chain (the other chain's amplitudes held at zero), in balanced
/// coordinates and mapped back. Such a vector always exists.
fn chain_null_vector(sys: &DarkSystem, balance: &DVector<f64>, chain: Level) -> DVector<f64> {
    let other = if chain == Level::R { Level::V } else { Level::R };
    let cols: Vec<usize> = (0..sys.unknowns.len()).filter(|&j| sys.unknowns[j].count(other) == 0).collect();
    let rows: Vec<usize> =
        (0..sys.matrix.nrows()).filter(|&i| cols.iter().any(|&j| sys.matrix[(i, j)] != 0.0)).collect();
    let mut sub = DMatrix::from_fn(rows.len(), cols.len(), |i, j| sys.matrix[(rows[i], cols[j])] * balance[cols[j]]);
    normalize_rows(&mut sub);
    let (_, vectors) = square_svd(&sub);
    let y = vectors.column(cols.len() - 1);
    let mut x = DVector::zeros(sys.unknowns.len());
    for (k, &j) in cols.iter().enumerate() {
        x[j] = y[k] * balance[j];
    }
    let norm = x.norm();
    x / norm
}

fn normalize_rows(m: &mut DMatrix<f64>) {
    for mut row in m.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
}

/// Below this the two chain vectors are treated as parallel.
const CHAIN_INDEPENDENCE: f64 = 1e-6;

/// Null space of the system. The dimension is read off the singular values
/// of the system as built and must be two.
///
/// The spanning vectors are one null vector on the ground state plus the
/// r-chain and one on the ground state plus the v-chain, found with
/// balanced columns and then orthonormalized. Every dark state is then a
/// combination without cancellation between large chain amplitudes, which
/// keeps the closure identity accurate to rounding for any member of the
/// space. When Ω_ge = 0 the two coincide and the plain null space is used.
pub fn solve_dark_space(sys: &DarkSystem) -> Result<DarkSpace> {
    let cols = sys.matrix.ncols();
    let (singular_values, plain) = square_svd(&sys.matrix);
    let cutoff = RANK_TOLERANCE * singular_values[0];
    let dim = singular_values.iter().filter(|&&s| s <= cutoff).count();
    if dim != 2 {
        return Err(Error::DarkRank { dim, singular_values });
    }
    let balance = column_balance(sys);
    let q1 = chain_null_vector(sys, &balance, Level::R);
    let x_v = chain_null_vector(sys, &balance, Level::V);
    // Explicit Gram-Schmidt: only rescales and combines the two vectors, so
    // small components keep their relative accuracy (Householder QR would
    // add absolute rounding to every entry).
    let q2 = &x_v - &q1 * q1.dot(&x_v);
    let independence = q2.norm();
    let basis = if independence > CHAIN_INDEPENDENCE {
        DMatrix::from_columns(&[q1, q2 / independence])
    } else {
        plain.columns(cols - 2, 2).into_owned()
    };
    Ok(DarkSpace { basis, singular_values })
}

/// The three terms (−1)^{N−1} Ω_ge^N C_ground, Ω_er^N C_allR, Ω_ev^N C_allV.
pub fn closure_terms(c: &DVector<f64>, sys: &DarkSystem) -> [f64; 3] {
    let n = sys.n_atoms as i32;
    let [ge, er, ev] = sys.omegas;
    let (g0, rn, vn) = sys.endpoints();
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    [sign * ge.powi(n) * c[g0], er.powi(n) * c[rn], ev.powi(n) * c[vn]]
}

/// |sum of [`closure_terms`]| divided by the largest term magnitude (0 when
/// all vanish).
pub fn verify_closure(c: &DVector<f64>, sys: &DarkSystem) -> f64 {
    let terms = closure_terms(c, sys);
    let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    terms.iter().sum::<f64>().abs() / scale
}

/// Largest residual |A c| over the null-space basis, relative to ‖A‖.
pub fn row_residual(space: &DarkSpace, sys: &DarkSystem) -> f64 {
    let scale = sys.matrix.norm().max(f64::MIN_POSITIVE);
    space.vectors().map(|c| (&sys.matrix * c).norm() / scale).fold(0.0, f64::max)
}

/// Squared overlap of `psi` (any symmetric-basis state, not necessarily
/// normalized) with the dark space for the given Rabi frequencies.
pub fn dark_projection(basis: &BasisIndex, psi: &[num_complex::Complex64], omegas: [f64; 3]) -> Result<f64> {
    let sys = build_dark_system(basis.n_atoms(), omegas[0], omegas[1], omegas[2])?;
    let space = solve_dark_space(&sys)?;
    let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
    let (mut re, mut im) = (DVector::zeros(sys.unknowns.len()), DVector::zeros(sys.unknowns.len()));
    for (k, occ) in sys.unknowns.iter().enumerate() {
        if let Some(i) = basis.find(occ) {
            re[k] = psi[i].re;
            im[k] = psi[i].im;
        }
    }
    Ok((space.projection(&re) + space.projection(&im)) / norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionSample {
    pub t: f64,
    pub projection: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConnectionReport {
    pub n_atoms: u32,
    pub min_projection: f64,
    pub t_at_min: f64,
    /// Samples where every Rabi frequency vanishes are omitted.
    pub series: Vec<ProjectionSample>,
}

/// Runs the no-jump evolution and projects ψ(t) onto the instantaneous
/// dark space at every sample.
pub fn dark_state_connection_check(model: &Model, options: &RunOptions) -> Result<ConnectionReport> {
    let record = evolve_nojump(model, &RunOptions { keep_states: true, ..*options })?;
    let states = record.states.as_ref().expect("states were requested");
    let mut series = Vec::new();
    for (sample, psi) in record.samples.iter().zip(states) {
        let omegas = model.schedule.amplitudes(sample.t);
        if omegas.iter().all(|&o| o == 0.0) {
            continue;
        }
        series.push(ProjectionSample { t: sample.t, projection: dark_projection(&model.basis, psi, omegas)? });
    }
    let worst = series
        .iter()
        .min_by(|a, b| a.projection.total_cmp(&b.projection))
        .copied()
        .unwrap_or(ProjectionSample { t: f64::NAN, projection: f64::NAN });
    Ok(ConnectionReport { n_atoms: model.params.n_atoms, min_projection: worst.projection, t_at_min: worst.t, series })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_atom_row() {
        let sys = build_dark_system(1, 2.0, 3.0, 5.0).unwrap();
        assert_eq!(sys.matrix.shape(), (1, 3));
        assert_eq!(sys.matrix.row(0).iter().copied().collect::<Vec<_>>(), vec![2.0, 3.0, 5.0]);
        assert_eq!(solve_dark_space(&build_dark_system(1, 1.0, 1.0, 1.0).unwrap()).unwrap().dim(), 2);
    }

    #[test]
    fn shapes_and_first_row() {
        for n in 1..=6u32 {
            let sys = build_dark_system(n, 1.1, 0.7, 1.9).unwrap();
            assert_eq!(sys.matrix.shape(), (2 * n as usize - 1, 2 * n as usize + 1));
        }
        let sys = build_dark_system(4, 1.1, 0.7, 1.9).unwrap();
        let row = sys.conditions.iter().position(|c| *c == Occupation::new(3, 1, 0, 0, 0, 0, 0)).unwrap();
        let nz: Vec<(usize, f64)> =
            sys.matrix.row(row).iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(k, v)| (k, *v)).collect();
        assert_eq!(nz, vec![(0, 2.0 * 1.1), (1, 0.7), (5, 1.9)]);
    }

    #[test]
    fn degenerate_input() {
        assert!(matches!(build_dark_system(3, 0.0, 0.0, 0.0), Err(Error::DegenerateDarkSystem)));
    }

    #[test]
    fn ground_is_dark_without_ge() {
        let sys = build_dark_system(5, 0.0, 1.3, 0.4).unwrap();
        let space = solve_dark_space(&sys).unwrap();
        let mut ground = DVector::zeros(sys.unknowns.len());
        ground[0] = 1.0;
        assert!((space.projection(&ground) - 1.0).abs() < 1e-12);
        // Both remaining terms vanish on their own here.
        for c in space.vectors() {
            assert!(closure_terms(&c, &sys).iter().sum::<f64>().abs() < 1e-12);
        }
    }

    #[test]
    fn negative_control() {
        let sys = build_dark_system(4, 1.0, 1.4, 0.8).unwrap();
        let row = sys.matrix.row(0).transpose();
        assert!(verify_closure(&row, &sys) > 1e-3);
    }

    fn omega() -> impl Strategy<Value = f64> {
        0.2f64..3.0
    }

    proptest! {
        #[test]
        fn chain_recursion(n in 2u32..7, ge in omega(), er in omega(), ev in omega()) {
            let sys = build_dark_system(n, ge, er, ev).unwrap();
            let space = solve_dark_space(&sys).unwrap();
            for c in space.vectors() {
                for g in 1..=n {
                    let r = n - g;
                    let lhs = (g as f64).sqrt() * ge * c[r as usize];
                    let rhs = -((r + 1) as f64).sqrt() * er * c[r as usize + 1];
                    if r >= 1 {
                        prop_assert!((lhs - rhs).abs() < 1e-10);
                    }
                }
                prop_assert!(verify_closure(&c, &sys) < 1e-10);
            }
        }

        #[test]
        fn scaling_invariance(n in 1u32..7, ge in omega(), er in omega(), ev in omega(), k in 0.1f64..10.0) {
            let a = solve_dark_space(&build_dark_system(n, ge, er, ev).unwrap()).unwrap();
            let b = solve_dark_space(&build_dark_system(n, k * ge, k * er, k * ev).unwrap()).unwrap();
            let pa = &a.basis * a.basis.transpose();
            let pb = &b.basis * b.basis.transpose();
            prop_assert!((pa - pb).norm() < 1e-12);
        }
    }
}
