//! Adaptive Dormand–Prince 5(4) stepper for complex linear ODE systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]);
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
/// 5th-order minus embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12 }
    }
}

#[derive(Debug, Clone)]
pub struct Stepper {
    tol: Tolerance,
    /// Step size proposed for the next attempt.
    h: f64,
    h_min: f64,
    k: [Vec<Complex64>; 7],
    stage: Vec<Complex64>,
    fsal: bool,
    pub accepted: u64,
    pub rejected: u64,
}

impl Stepper {
    pub fn new(dim: usize, tol: Tolerance, h_initial: f64) -> Self {
        let zeros = || vec![Complex64::new(0.0, 0.0); dim];
        Self {
            tol,
            h: h_initial,
            h_min: 1e-14,
            k: std::array::from_fn(|_| zeros()),
            stage: zeros(),
            fsal: false,
            accepted: 0,
            rejected: 0,
        }
    }

    /// Forget the cached derivative after the state was changed externally.
    pub fn invalidate(&mut self) {
        self.fsal = false;
    }

    fn combine(&mut self, y: &[Complex64], h: f64, coeffs: &[f64]) {
        for (i, s) in self.stage.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &a) in coeffs.iter().enumerate() {
                if a != 0.0 {
                    acc += self.k[j][i] * a;
                }
            }
            *s = y[i] + acc * h;
        }
    }

    /// Runs stages 2..7 from (t, y) with k[0] already filled; leaves the
    /// 5th-order solution in `out` and its derivative in k[6].
    fn stages(&mut self, sys: &impl OdeSystem, t: f64, y: &[Complex64], h: f64, out: &mut [Complex64]) {
        let rows: [&[f64]; 5] = [&A2, &A3, &A4, &A5, &A6];
        for (s, row) in rows.iter().enumerate() {
            self.combine(y, h, row);
            sys.rhs(t + C[s + 1] * h, &self.stage, &mut self.k[s + 1]);
        }
        self.combine(y, h, &B);
        out.copy_from_slice(&self.stage);
        let last = &mut self.k[6];
        sys.rhs(t + h, out, last);
    }

    fn error_norm(&self, y: &[Complex64], y_new: &[Complex64], h: f64) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..y.len() {
            let mut e = Complex64::new(0.0, 0.0);
            for (j, &w) in E.iter().enumerate() {
                if w != 0.0 {
                    e += self.k[j][i] * w;
                }
            }
            let scale = self.tol.atol + self.tol.rtol * y[i].norm().max(y_new[i].norm());
            worst = worst.max((e * h).norm() / scale);
        }
        worst
    }

    fn ensure_k0(&mut self, sys: &impl OdeSystem, t: f64, y: &[Complex64]) {
        if !self.fsal {
            sys.rhs(t, y, &mut self.k[0]);
            self.fsal = true;
        }
    }

    /// Advances (t, y) by one accepted step without passing `t_end`.
    /// Returns the new time; `y` is updated in place.
    pub fn step(&mut self, sys: &impl OdeSystem, t: f64, y: &mut [Complex64], t_end: f64) -> Result<f64> {
        let mut y_new = vec![Complex64::new(0.0, 0.0); y.len()];
        self.ensure_k0(sys, t, y);
        loop {
            let remaining = t_end - t;
            let clipped = self.h >= remaining * (1.0 - 1e-12);
            let h = if clipped { remaining } else { self.h };
            if h < self.h_min {
                return Err(Error::Integrator { t, reason: format!("step size {h:.3e} below minimum") });
            }
            self.stages(sys, t, y, h, &mut y_new);
            let err = self.error_norm(y, &y_new, h);
            if !err.is_finite() {
                return Err(Error::Integrator { t, reason: "non-finite error estimate".into() });
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                self.accepted += 1;
                y.copy_from_slice(&y_new);
                self.k.swap(0, 6);
                let proposal = h * factor;
                self.h = if clipped { self.h.max(proposal) } else { proposal };
                return Ok(if clipped { t_end } else { t + h });
            }
            self.rejected += 1;
            self.h = h * factor.min(1.0);
        }
    }

    /// One uncontrolled 5th-order step of size `h` from (t, y) into `out`.
    /// Used to locate events inside an accepted step; leaves the FSAL cache
    /// invalid.
    pub fn trial(&mut self, sys: &impl OdeSystem, t: f64, y: &[Complex64], h: f64, out: &mut [Complex64]) {
        sys.rhs(t, y, &mut self.k[0]);
        self.stages(sys, t, y, h, out);
        self.fsal = false;
    }

    /// Integrates from t0 to t1 with adaptive steps.
    pub fn advance(&mut self, sys: &impl OdeSystem, t0: f64, t1: f64, y: &mut [Complex64]) -> Result<()> {
        let mut t = t0;
        while t < t1 {
            t = self.step(sys, t, y, t1)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// dy/dt = −iωy − γy/2
    struct Decaying {
        omega: f64,
        gamma: f64,
    }

    impl OdeSystem for Decaying {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[Complex64], dy: &mut [Complex64]) {
            dy[0] = y[0] * Complex64::new(-0.5 * self.gamma, -self.omega);
        }
    }

    #[test]
    fn matches_exponential() {
        let sys = Decaying { omega: 40.0, gamma: 0.3 };
        let mut y = vec![Complex64::new(1.0, 0.0)];
        let mut st = Stepper::new(1, Tolerance::default(), 1e-3);
        st.advance(&sys, 0.0, 3.0, &mut y).unwrap();
        let exact = Complex64::new(-0.15 * 3.0, -120.0).exp();
        assert!((y[0] - exact).norm() < 1e-8, "{:?} vs {:?}", y[0], exact);
    }

    /// Driven two-level Rabi problem with exact solution.
    struct Rabi(f64);
    impl OdeSystem for Rabi {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _t: f64, y: &[Complex64], dy: &mut [Complex64]) {
            let i = Complex64::new(0.0, -0.5 * self.0);
            dy[0] = i * y[1];
            dy[1] = i * y[0];
        }
    }

    #[test]
    fn rabi_flop() {
        let omega = 7.0;
        let mut y = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let mut st = Stepper::new(2, Tolerance::default(), 1e-2);
        let t = 2.3;
        st.advance(&Rabi(omega), 0.0, t, &mut y).unwrap();
        assert!((y[0].norm_sqr() - (omega * t / 2.0).cos().powi(2)).abs() < 1e-9);
        assert!((y[0].norm_sqr() + y[1].norm_sqr() - 1.0).abs() < 1e-9);
    }
}
