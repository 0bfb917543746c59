//! Radial wavefunctions by inward Numerov integration on a square-root grid.
//!
//! With x = √r and X(x) = u(r)/√x the radial equation loses its first
//! derivative term and reads
//!
//! ```text
//! X'' = [ 8x² (V(x²) − E) + (2l + 1/2)(2l + 3/2) / x² ] X
//! ```
//!
//! in atomic units. A uniform step in x resolves the fast oscillations near
//! the core and the slow ones near the outer turning point equally well.

use crate::error::{Error, Result};

/// Central potential in atomic units.
pub trait ModelPotential: Sync {
    fn potential(&self, r: f64, l: u32) -> f64;
}

/// Bare Coulomb tail −1/r seen by a Rydberg electron outside the core.
#[derive(Debug, Clone, Copy, Default)]
pub struct Coulomb;

impl ModelPotential for Coulomb {
    fn potential(&self, r: f64, _l: u32) -> f64 {
        -1.0 / r
    }
}

pub const DEFAULT_GRID_POINTS: usize = 20_001;
pub const DEFAULT_OUTER_SCALE: f64 = 2.5;
/// Largest |u| allowed at the outer boundary, relative to the peak.
const TAIL_TOLERANCE: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    /// Inner cutoff in Bohr radii.
    pub r_inner: f64,
    /// Outer boundary in Bohr radii.
    pub r_outer: f64,
    pub points: usize,
}

impl RadialGrid {
    pub fn new(r_inner: f64, r_outer: f64, points: usize) -> Result<Self> {
        if !(r_inner > 0.0 && r_outer > r_inner) {
            return Err(Error::InvalidGrid(format!("need 0 < r_inner < r_outer, got [{r_inner}, {r_outer}]")));
        }
        if points < 16 {
            return Err(Error::InvalidGrid(format!("{points} points is too few")));
        }
        // Simpson's rule wants an odd count.
        let points = points | 1;
        Ok(Self { r_inner, r_outer, points })
    }

    /// Default grid for a level with effective quantum number `n_star`. Low
    /// levels get room for a tail of about 25 decay lengths n* past the
    /// classical turning point 2n*².
    pub fn for_level(n_star: f64, r_inner: f64) -> Self {
        let r_outer = (DEFAULT_OUTER_SCALE * n_star * n_star).max(2.0 * n_star * n_star + 25.0 * n_star);
        Self::new(r_inner, r_outer, DEFAULT_GRID_POINTS).expect("valid default grid")
    }

    /// Shared grid for an overlap integral between two levels.
    pub fn for_pair(n_star_a: f64, n_star_b: f64, r_inner: f64) -> Self {
        Self::for_level(n_star_a.max(n_star_b), r_inner)
    }

    pub fn with_points(self, points: usize) -> Result<Self> {
        Self::new(self.r_inner, self.r_outer, points)
    }

    fn step(&self) -> f64 {
        (self.r_outer.sqrt() - self.r_inner.sqrt()) / (self.points - 1) as f64
    }

    fn x(&self, i: usize) -> f64 {
        self.r_inner.sqrt() + i as f64 * self.step()
    }
}

/// Reduced radial function u(r) = r R(r) sampled on a square-root grid.
#[derive(Debug, Clone)]
pub struct RadialWavefunction {
    pub grid: RadialGrid,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
}

impl RadialWavefunction {
    fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.grid.step();
        let last = self.r.len() - 1;
        self.r.iter().enumerate().map(move |(i, r)| {
            let simpson = if i == 0 || i == last {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            // dr = 2x dx
            simpson * h / 3.0 * 2.0 * r.sqrt()
        })
    }

    /// ∫ f(r) u(r)² dr over the grid.
    pub fn expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.weights()
            .zip(self.r.iter().zip(&self.u))
            .map(|(w, (&r, &u))| w * f(r) * u * u)
            .sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.expectation(|_| 1.0)
    }

    /// ∫ u_self(r) u_other(r) r dr; both functions must share a grid.
    pub fn radial_overlap_r(&self, other: &RadialWavefunction) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::InvalidGrid("radial overlap needs both functions on the same grid".into()));
        }
        Ok(self
            .weights()
            .zip(self.r.iter().zip(self.u.iter().zip(&other.u)))
            .map(|(w, (&r, (&a, &b)))| w * a * b * r)
            .sum())
    }

    /// Sign changes of u, ignoring exact zeros.
    pub fn node_count(&self) -> usize {
        let mut last_sign = 0.0;
        let mut nodes = 0;
        for &u in &self.u {
            if u == 0.0 {
                continue;
            }
            let sign = u.signum();
            if last_sign != 0.0 && sign != last_sign {
                nodes += 1;
            }
            last_sign = sign;
        }
        nodes
    }
}

/// ln of the Whittaker function W_{κ,μ}(z) from its asymptotic series,
/// or `None` when the series does not settle.
fn ln_whittaker(kappa: f64, mu: f64, z: f64) -> Option<f64> {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 1..200 {
        let kf = k as f64;
        let next = term * (mu - kappa + kf - 0.5) * (-mu - kappa + kf - 0.5) / kf * (-1.0 / z);
        if next == 0.0 {
            // Terminating series (integer κ − μ − 1/2): exact.
            return (sum > 0.0).then(|| -z / 2.0 + kappa * z.ln() + sum.ln());
        }
        if next.abs() > term.abs() {
            return None;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-16 * sum.abs() {
            break;
        }
    }
    if term.abs() > 1e-10 * sum.abs() || sum <= 0.0 {
        return None;
    }
    Some(-z / 2.0 + kappa * z.ln() + sum.ln())
}

/// Reduced radial function of a bound state with energy −1/(2 n*²) a.u.,
/// integrated inward from `grid.r_outer` and normalized to ∫u² dr = 1.
pub fn radial_wavefunction(
    n_star: f64,
    l: u32,
    grid: &RadialGrid,
    potential: &dyn ModelPotential,
) -> Result<RadialWavefunction> {
    if !(n_star > 0.0) {
        return Err(Error::InvalidLevel(format!("effective quantum number {n_star} must be positive")));
    }
    let npts = grid.points;
    let h = grid.step();
    let energy = -0.5 / (n_star * n_star);
    let lf = l as f64;
    let centrifugal = (2.0 * lf + 0.5) * (2.0 * lf + 1.5);

    let x: Vec<f64> = (0..npts).map(|i| grid.x(i)).collect();
    let f: Vec<f64> = x
        .iter()
        .map(|&x| {
            let r = x * x;
            8.0 * r * (potential.potential(r, l) - energy) + centrifugal / r
        })
        .collect();
    let w: Vec<f64> = f.iter().map(|f| 1.0 - h * h * f / 12.0).collect();

    // Starting values from the decaying Coulomb solution u ∝ W_{n*, l+1/2}(2r/n*),
    // falling back to WKB when the asymptotic series is not usable.
    let start_ratio = {
        let (r1, r0) = (x[npts - 1] * x[npts - 1], x[npts - 2] * x[npts - 2]);
        let mu = lf + 0.5;
        let ln_u = match (
            ln_whittaker(n_star, mu, 2.0 * r1 / n_star),
            ln_whittaker(n_star, mu, 2.0 * r0 / n_star),
        ) {
            (Some(a), Some(b)) => a - b,
            _ => {
                let p = |r: f64| (2.0 * (-1.0 / r - energy) + lf * (lf + 1.0) / (r * r)).max(0.0).sqrt();
                let (p1, p0) = (p(r1), p(r0));
                -0.5 * (p1 + p0) * (r1 - r0) + 0.5 * (p0 / p1.max(1e-300)).ln()
            }
        };
        // X = u / √x
        ln_u.exp() * (x[npts - 2] / x[npts - 1]).sqrt()
    };

    // Below the inner classical turning point the regular solution shrinks
    // inward without nodes; growth or a sign change there means the
    // irregular solution has taken over.
    let inner_turn = f.iter().position(|&f| f < 0.0).unwrap_or(0);

    let mut big_x = vec![0.0; npts];
    big_x[npts - 2] = 1.0;
    big_x[npts - 1] = start_ratio;
    let mut cut = 0;
    for i in (1..npts - 1).rev() {
        big_x[i - 1] = ((12.0 - 10.0 * w[i]) * big_x[i] - w[i + 1] * big_x[i + 1]) / w[i - 1];
        if i - 1 < inner_turn && (big_x[i - 1].abs() > big_x[i].abs() || big_x[i - 1] * big_x[i] < 0.0) {
            cut = i;
            break;
        }
        if !big_x[i - 1].is_finite() {
            return Err(Error::Integrator { t: x[i - 1] * x[i - 1], reason: "Numerov overflow".into() });
        }
    }
    for v in &mut big_x[..cut] {
        *v = 0.0;
    }

    let r: Vec<f64> = x.iter().map(|x| x * x).collect();
    let u: Vec<f64> = big_x.iter().zip(&x).map(|(v, x)| v * x.sqrt()).collect();
    let mut wf = RadialWavefunction { grid: *grid, r, u };

    let norm = wf.norm_squared().sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::Integrator { t: grid.r_inner, reason: "radial function has zero norm".into() });
    }
    // Outward-positive sign convention: u > 0 just inside the outer boundary.
    let sign = wf.u[npts - 2].signum();
    for v in &mut wf.u {
        *v *= sign / norm;
    }

    let peak = wf.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tail = wf.u[npts - 2].abs() / peak;
    if tail > TAIL_TOLERANCE {
        return Err(Error::GridTooShort { r_max: grid.r_outer, tail });
    }
    Ok(wf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_and_hydrogenic_nodes() {
        for (n, l) in [(1u32, 0u32), (2, 0), (3, 1), (5, 2), (8, 0), (8, 3)] {
            let nf = n as f64;
            let grid = RadialGrid::new(1e-4, 4.0 * nf * nf + 30.0, 20_001).unwrap();
            let wf = radial_wavefunction(nf, l, &grid, &Coulomb).unwrap();
            assert!((wf.norm_squared() - 1.0).abs() < 1e-12);
            assert_eq!(wf.node_count(), (n - l - 1) as usize, "n={n} l={l}");
        }
    }

    #[test]
    fn short_grid_is_reported() {
        let grid = RadialGrid::new(1e-3, 4.0, 4001).unwrap();
        let err = radial_wavefunction(2.0, 0, &grid, &Coulomb).unwrap_err();
        assert!(matches!(err, Error::GridTooShort { .. }));
    }

    #[test]
    fn whittaker_series_terminates_for_hydrogen() {
        // W_{2,1/2}(z) = z (z − 2) e^{−z/2}
        let z: f64 = 7.3;
        let exact = (z * (z - 2.0)).ln() - z / 2.0;
        assert!((ln_whittaker(2.0, 0.5, z).unwrap() - exact).abs() < 1e-13);
    }
}
