//! Shared test oracles. Not every test binary uses every helper.
#![allow(dead_code)]

use cavity_blockade::basis::{BasisIndex, Level, Occupation};
use cavity_blockade::dynamics::Model;
use cavity_blockade::hamiltonian::{build_h_ac, compensation, LaserCouplings};
use num_complex::Complex64;

type Triplets = Vec<(usize, usize, Complex64)>;

/// Dense master-equation propagator over a model's basis, integrated with
/// fixed-step classic RK4. It shares the Hamiltonian with the library but
/// builds its own collapse operators from the occupation numbers:
/// σ_{g←e}, σ_{g←r}, σ_{g←v} collective lowering and the photon a.
pub struct Lindblad {
    dim: usize,
    static_h: Triplets,
    lasers: [Triplets; 3],
    schedule: cavity_blockade::hamiltonian::PulseSchedule,
    /// Nonzeros (target, source, amplitude) of each J_k with its rate.
    jumps: Vec<(f64, Vec<(usize, usize, f64)>)>,
    /// Σ_k γ_k J_k†J_k, diagonal because each J_k maps distinct states to
    /// distinct states.
    loss: Vec<f64>,
    all_r: Vec<usize>,
    all_v: Vec<usize>,
    initial: Vec<Complex64>,
}

fn triplets(m: &cavity_blockade::sparse::OperatorMatrix) -> Triplets {
    m.iter().collect()
}

fn lower(occ: &Occupation, from: Level) -> Option<(Occupation, f64)> {
    let c = occ.count(from);
    (c > 0).then(|| {
        let mut t = *occ;
        t.counts[from.index()] -= 1;
        t.counts[Level::G.index()] += 1;
        (t, (c as f64).sqrt())
    })
}

fn photon_loss(occ: &Occupation) -> Option<(Occupation, f64)> {
    (occ.n > 0).then(|| (Occupation { n: occ.n - 1, ..*occ }, (occ.n as f64).sqrt()))
}

impl Lindblad {
    pub fn new(model: &Model) -> Self {
        let basis: &BasisIndex = &model.basis;
        let p = &model.params;
        let static_h = triplets(&build_h_ac(p, basis).unwrap().add(&compensation(p, basis)));
        let lc = LaserCouplings::new(basis);
        let lasers = [triplets(&lc.ge), triplets(&lc.er), triplets(&lc.ev)];

        let ops: [(f64, &dyn Fn(&Occupation) -> Option<(Occupation, f64)>); 4] = [
            (p.gamma_eg, &|o| lower(o, Level::E)),
            (p.gamma_r, &|o| lower(o, Level::R)),
            (p.gamma_v, &|o| lower(o, Level::V)),
            (p.kappa, &photon_loss),
        ];
        let dim = basis.len();
        let mut jumps = Vec::new();
        let mut loss = vec![0.0; dim];
        for (rate, op) in ops {
            let mut entries = Vec::new();
            let mut hit = vec![false; dim];
            for (s, occ) in basis.states().iter().enumerate() {
                if let Some((target, amp)) = op(occ) {
                    let t = basis.find(&target).expect("basis closed under jumps");
                    assert!(!hit[t], "collapse operator is not injective");
                    hit[t] = true;
                    entries.push((t, s, amp));
                    loss[s] += rate * amp * amp;
                }
            }
            jumps.push((rate, entries));
        }
        let n = basis.n_atoms();
        let pick = |l: Level| -> Vec<usize> {
            basis.states().iter().enumerate().filter(|(_, o)| o.count(l) == n).map(|(i, _)| i).collect()
        };
        Self {
            dim,
            static_h,
            lasers,
            schedule: model.schedule,
            jumps,
            loss,
            all_r: pick(Level::R),
            all_v: pick(Level::V),
            initial: model.initial_state(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn rhs(&self, t: f64, rho: &[Complex64], out: &mut [Complex64]) {
        let d = self.dim;
        let i = Complex64::i();
        out.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        let omegas = self.schedule.amplitudes(t);
        let terms = std::iter::once((1.0, &self.static_h)).chain(omegas.iter().copied().zip(&self.lasers));
        for (scale, h) in terms {
            if scale == 0.0 {
                continue;
            }
            for &(r, c, v) in h {
                let hv = v * scale;
                // −i H ρ: row r of the result picks up row c of ρ.
                for j in 0..d {
                    out[r * d + j] -= i * hv * rho[c * d + j];
                }
                // +i ρ H: column c of the result picks up column r of ρ.
                for k in 0..d {
                    out[k * d + c] += i * rho[k * d + r] * hv;
                }
            }
        }
        for a in 0..d {
            for b in 0..d {
                out[a * d + b] -= 0.5 * (self.loss[a] + self.loss[b]) * rho[a * d + b];
            }
        }
        for (rate, entries) in &self.jumps {
            if *rate == 0.0 {
                continue;
            }
            for &(t1, s1, a1) in entries {
                for &(t2, s2, a2) in entries {
                    out[t1 * d + t2] += rate * a1 * a2 * rho[s1 * d + s2];
                }
            }
        }
    }

    /// ρ_R, ρ_V and trace at each requested time, starting from the model's
    /// initial state at `t0`. Steps never exceed `dt_max`.
    pub fn run(&self, t0: f64, times: &[f64], dt_max: f64) -> Vec<(f64, f64, f64)> {
        let d = self.dim;
        let psi = &self.initial;
        let mut rho: Vec<Complex64> = (0..d * d).map(|ij| psi[ij / d] * psi[ij % d].conj()).collect();
        let mut k = [(); 4].map(|_| vec![Complex64::new(0.0, 0.0); d * d]);
        let mut tmp = vec![Complex64::new(0.0, 0.0); d * d];
        let mut t = t0;
        let mut out = Vec::with_capacity(times.len());
        for &target in times {
            let steps = ((target - t) / dt_max).ceil().max(0.0) as usize;
            if steps > 0 {
                let h = (target - t) / steps as f64;
                for _ in 0..steps {
                    self.rhs(t, &rho, &mut k[0]);
                    for (x, (r, k0)) in tmp.iter_mut().zip(rho.iter().zip(&k[0])) {
                        *x = r + k0 * (0.5 * h);
                    }
                    self.rhs(t + 0.5 * h, &tmp, &mut k[1]);
                    for (x, (r, k1)) in tmp.iter_mut().zip(rho.iter().zip(&k[1])) {
                        *x = r + k1 * (0.5 * h);
                    }
                    self.rhs(t + 0.5 * h, &tmp, &mut k[2]);
                    for (x, (r, k2)) in tmp.iter_mut().zip(rho.iter().zip(&k[2])) {
                        *x = r + k2 * h;
                    }
                    self.rhs(t + h, &tmp, &mut k[3]);
                    for (idx, r) in rho.iter_mut().enumerate() {
                        *r += (k[0][idx] + 2.0 * k[1][idx] + 2.0 * k[2][idx] + k[3][idx]) * (h / 6.0);
                    }
                    t += h;
                }
            }
            t = target;
            let pop = |idx: &[usize]| idx.iter().map(|&i| rho[i * d + i].re).sum::<f64>();
            let trace = (0..d).map(|i| rho[i * d + i].re).sum::<f64>();
            out.push((pop(&self.all_r), pop(&self.all_v), trace));
        }
        out
    }
}
