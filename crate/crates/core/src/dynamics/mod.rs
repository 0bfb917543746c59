//! Time evolution under the non-Hermitian effective Hamiltonian.
//!
//! Two drivers share one stepping loop:
//!
//! * [`evolve_nojump`] follows the deterministic conditioned state that never
//!   emits. Its norm loss, split per decay channel, gives the accumulated
//!   emission probabilities.
//! * [`run_trajectory`] is a Monte-Carlo wavefunction trajectory: it jumps
//!   when the squared norm falls below a uniform random threshold.
//!
//! Each channel k has a collapse operator C_k = √γ_k J_k with
//! J_k†J_k = N_k, the number of atoms in the decaying level (or photons).
//! Within the symmetric basis J_k moves one atom with amplitude √N_k.

mod ensemble;
pub mod integrator;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use ensemble::{run_ensemble, trajectory_rng, EnsembleOptions, EnsembleSummary, SampleMoments};
use integrator::{OdeSystem, Stepper, Tolerance};

use crate::analysis::{entropy, Diagnostics};
use crate::basis::{BasisIndex, Enumeration, Level, Occupation};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_h_ac, compensation, LaserCouplings, PulseSchedule, SystemParams};
use crate::sparse::OperatorMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    EDecay,
    RDecay,
    VDecay,
    Cavity,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 4] = [ChannelKind::EDecay, ChannelKind::RDecay, ChannelKind::VDecay, ChannelKind::Cavity];

    pub fn label(self) -> &'static str {
        match self {
            ChannelKind::EDecay => "e_decay",
            ChannelKind::RDecay => "r_decay",
            ChannelKind::VDecay => "v_decay",
            ChannelKind::Cavity => "cavity",
        }
    }

    /// Eigenvalue of J†J on a basis state.
    pub fn count(self, occ: &Occupation) -> u32 {
        match self {
            ChannelKind::EDecay => occ.count(Level::E),
            ChannelKind::RDecay => occ.count(Level::R),
            ChannelKind::VDecay => occ.count(Level::V),
            ChannelKind::Cavity => occ.n,
        }
    }

    /// J acting on a basis state: target and amplitude √count.
    pub fn jump(self, occ: &Occupation) -> Option<(Occupation, f64)> {
        let c = self.count(occ);
        if c == 0 {
            return None;
        }
        let mut target = *occ;
        match self {
            ChannelKind::EDecay | ChannelKind::RDecay | ChannelKind::VDecay => {
                let from = match self {
                    ChannelKind::EDecay => Level::E,
                    ChannelKind::RDecay => Level::R,
                    _ => Level::V,
                };
                target.counts[from.index()] -= 1;
                target.counts[Level::G.index()] += 1;
            }
            ChannelKind::Cavity => target.n -= 1,
        }
        Some((target, (c as f64).sqrt()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpChannel {
    pub kind: ChannelKind,
    /// Rate γ in rad/µs.
    pub rate: f64,
}

pub fn channels(params: &SystemParams) -> [JumpChannel; 4] {
    let rates = [params.gamma_eg, params.gamma_r, params.gamma_v, params.kappa];
    std::array::from_fn(|k| JumpChannel { kind: ChannelKind::ALL[k], rate: rates[k] })
}

/// H − (i/2) Σ_k γ_k N_k.
pub fn effective_hamiltonian(h: &OperatorMatrix, channels: &[JumpChannel], basis: &BasisIndex) -> OperatorMatrix {
    let loss: Vec<(usize, usize, Complex64)> = basis
        .states()
        .iter()
        .enumerate()
        .map(|(i, occ)| {
            let rate: f64 = channels.iter().map(|c| c.rate * c.kind.count(occ) as f64).sum();
            (i, i, Complex64::new(0.0, -0.5 * rate))
        })
        .collect();
    h.add(&OperatorMatrix::from_triplets(basis.len(), loss))
}

/// Everything needed to propagate one parameter set; immutable and shared
/// across trajectories.
#[derive(Debug, Clone)]
pub struct Model {
    pub params: SystemParams,
    pub schedule: PulseSchedule,
    pub basis: BasisIndex,
    static_h: OperatorMatrix,
    lasers: LaserCouplings,
    channels: [JumpChannel; 4],
    /// γ_k N_k per basis state.
    channel_loss: [Vec<f64>; 4],
    total_loss: Vec<f64>,
    jumps: [Vec<Option<(usize, f64)>>; 4],
    diagnostics: Diagnostics,
    initial: usize,
}

impl Model {
    /// Builds the basis reachable from the all-ground state under the
    /// Hamiltonian and every jump.
    pub fn new(params: SystemParams, schedule: PulseSchedule) -> Result<Self> {
        params.validate()?;
        let seed = Occupation::ground(params.n_atoms);
        let basis = BasisIndex::enumerate(
            params.n_atoms,
            params.n_max,
            Enumeration::ReachableFrom { seed, include_jumps: true },
        )?;
        Self::with_basis(params, schedule, basis)
    }

    pub fn with_basis(params: SystemParams, schedule: PulseSchedule, basis: BasisIndex) -> Result<Self> {
        params.validate()?;
        let static_h = build_h_ac(&params, &basis)?.add(&compensation(&params, &basis));
        let lasers = LaserCouplings::new(&basis);
        let channels = channels(&params);
        let mut channel_loss: [Vec<f64>; 4] = Default::default();
        let mut jumps: [Vec<Option<(usize, f64)>>; 4] = Default::default();
        for (k, ch) in channels.iter().enumerate() {
            for occ in basis.states() {
                channel_loss[k].push(ch.rate * ch.kind.count(occ) as f64);
                let target = match ch.kind.jump(occ) {
                    Some((t, f)) => match basis.find(&t) {
                        Some(j) => Some((j, f)),
                        None if ch.rate > 0.0 => {
                            return Err(Error::BasisMismatch(format!(
                                "{} jump from {occ} leaves the basis",
                                ch.kind.label()
                            )))
                        }
                        None => None,
                    },
                    None => None,
                };
                jumps[k].push(target);
            }
        }
        let total_loss = (0..basis.len()).map(|i| channel_loss.iter().map(|c| c[i]).sum()).collect();
        let diagnostics = Diagnostics::new(&basis);
        let initial = basis.require(&Occupation::ground(params.n_atoms))?;
        Ok(Self { params, schedule, basis, static_h, lasers, channels, channel_loss, total_loss, jumps, diagnostics, initial })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diagnostics
    }

    pub fn channels(&self) -> &[JumpChannel; 4] {
        &self.channels
    }

    pub fn initial_state(&self) -> Vec<Complex64> {
        let mut psi = vec![Complex64::new(0.0, 0.0); self.dim()];
        psi[self.initial] = Complex64::new(1.0, 0.0);
        psi
    }

    /// Full H_eff(t) as an explicit matrix (for inspection and tests).
    pub fn effective_hamiltonian_at(&self, t: f64) -> OperatorMatrix {
        let h = self.static_h.add(&self.lasers.at(self.schedule.amplitudes(t)));
        effective_hamiltonian(&h, &self.channels, &self.basis)
    }

    fn channel_rates(&self, psi: &[Complex64]) -> [f64; 4] {
        std::array::from_fn(|k| psi.iter().zip(&self.channel_loss[k]).map(|(a, g)| a.norm_sqr() * g).sum())
    }

    fn apply_jump(&self, k: usize, psi: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        for (i, target) in self.jumps[k].iter().enumerate() {
            if let Some((j, f)) = target {
                out[*j] += psi[i] * *f;
            }
        }
        let norm = out.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        out.iter_mut().for_each(|a| *a /= norm);
        out
    }
}

/// State vector extended by the four accumulated channel probabilities,
/// stored in the real parts of the trailing slots.
struct Augmented<'a>(&'a Model);

impl OdeSystem for Augmented<'_> {
    fn dim(&self) -> usize {
        self.0.dim() + 4
    }

    fn rhs(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]) {
        let m = self.0;
        let n = m.dim();
        let (psi, dpsi) = (&y[..n], &mut dy[..n]);
        let minus_i = Complex64::new(0.0, -1.0);
        for (d, (a, loss)) in dpsi.iter_mut().zip(psi.iter().zip(&m.total_loss)) {
            *d = *a * (-0.5 * loss);
        }
        m.static_h.mul_add(minus_i, psi, dpsi);
        let [ge, er, ev] = m.schedule.amplitudes(t);
        for (omega, op) in [(ge, &m.lasers.ge), (er, &m.lasers.er), (ev, &m.lasers.ev)] {
            if omega != 0.0 {
                op.mul_add(minus_i * omega, psi, dpsi);
            }
        }
        let rates = m.channel_rates(psi);
        for (k, r) in rates.iter().enumerate() {
            dy[n + k] = Complex64::new(*r, 0.0);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    /// Squared norm of the conditioned (unrenormalized) state.
    pub norm: f64,
    pub rho_r: f64,
    pub rho_v: f64,
    /// Single-atom von Neumann entropy, nats.
    pub entropy: f64,
    pub p_e: f64,
    pub p_rv: f64,
    pub p_kappa: f64,
    pub n_photons: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpEvent {
    pub t: f64,
    pub channel: ChannelKind,
}

/// Sampled observables of one run. In no-jump runs the P columns are
/// accumulated emission probabilities; in stochastic runs they count the
/// jumps that have occurred per channel.
#[derive(Debug, Clone, Default, Serialize)]
pub struct TrajectoryRecord {
    pub samples: Vec<Sample>,
    #[serde(skip)]
    pub final_state: Option<Vec<Complex64>>,
    #[serde(skip)]
    pub states: Option<Vec<Vec<Complex64>>>,
    pub jumps: Vec<JumpEvent>,
    pub steps_accepted: u64,
    pub steps_rejected: u64,
}

impl TrajectoryRecord {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("record has samples")
    }

    pub fn total_loss(&self) -> f64 {
        let s = self.last();
        s.p_e + s.p_rv + s.p_kappa
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Number of evenly spaced output samples (≥ 2).
    pub samples: usize,
    /// Defaults to the schedule's span.
    pub span: Option<(f64, f64)>,
    pub tolerance: Tolerance,
    /// Keep the state vector at every sample.
    pub keep_states: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { samples: 1000, span: None, tolerance: Tolerance::default(), keep_states: false }
    }
}

impl RunOptions {
    fn sample_times(&self, schedule: &PulseSchedule) -> Result<Vec<f64>> {
        let (t0, t1) = self.span.unwrap_or_else(|| schedule.default_span());
        if self.samples < 2 || !(t1 > t0) {
            return Err(Error::InvalidParam(format!("need >= 2 samples over a positive span, got {} over [{t0}, {t1}]", self.samples)));
        }
        let n = self.samples - 1;
        Ok((0..=n).map(|i| if i == n { t1 } else { t0 + (t1 - t0) * i as f64 / n as f64 }).collect())
    }
}

enum Mode {
    NoJump,
    Stochastic(ChaCha8Rng),
}

/// Bisection depth for locating a jump inside an accepted step.
const JUMP_BISECTIONS: usize = 48;

fn norm_sq(psi: &[Complex64]) -> f64 {
    psi.iter().map(|a| a.norm_sqr()).sum()
}

fn propagate(model: &Model, options: &RunOptions, mut mode: Mode) -> Result<TrajectoryRecord> {
    let times = options.sample_times(&model.schedule)?;
    let (t0, t1) = (times[0], *times.last().unwrap());
    let mut stops: Vec<f64> = times.clone();
    stops.extend(model.schedule.breakpoints().into_iter().filter(|&b| b > t0 && b < t1));
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    let n = model.dim();
    let sys = Augmented(model);
    let mut y = model.initial_state();
    y.extend([Complex64::new(0.0, 0.0); 4]);
    let mut stepper = Stepper::new(n + 4, options.tolerance, 1e-3);
    let mut record = TrajectoryRecord::default();
    let mut counts = [0u32; 4];
    let mut threshold = match &mut mode {
        Mode::NoJump => 0.0,
        Mode::Stochastic(rng) => rng.random::<f64>(),
    };
    let mut scratch = y.clone();

    let mut t = t0;
    let mut next_sample = 0;
    for &stop in &stops {
        while t < stop {
            let (t_prev, y_prev) = (t, y.clone());
            t = stepper.step(&sys, t, &mut y, stop)?;
            let Mode::Stochastic(rng) = &mut mode else { continue };
            if norm_sq(&y[..n]) > threshold {
                continue;
            }
            // Locate the crossing inside [t_prev, t].
            let (mut lo, mut hi) = (0.0, t - t_prev);
            for _ in 0..JUMP_BISECTIONS {
                let mid = 0.5 * (lo + hi);
                stepper.trial(&sys, t_prev, &y_prev, mid, &mut scratch);
                if norm_sq(&scratch[..n]) > threshold {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            stepper.trial(&sys, t_prev, &y_prev, hi, &mut scratch);
            t = t_prev + hi;
            let rates = model.channel_rates(&scratch[..n]);
            let total: f64 = rates.iter().sum();
            let mut pick = rng.random::<f64>() * total;
            let mut k = 3;
            for (c, r) in rates.iter().enumerate() {
                if *r > 0.0 && pick < *r {
                    k = c;
                    break;
                }
                pick -= r;
            }
            let jumped = model.apply_jump(k, &scratch[..n]);
            y[..n].copy_from_slice(&jumped);
            counts[k] += 1;
            record.jumps.push(JumpEvent { t, channel: ChannelKind::ALL[k] });
            threshold = rng.random::<f64>();
            stepper.invalidate();
        }
        while next_sample < times.len() && times[next_sample] <= t {
            record.samples.push(observe(model, times[next_sample], &y, &mode, &counts));
            if options.keep_states {
                record.states.get_or_insert_with(Vec::new).push(y[..n].to_vec());
            }
            next_sample += 1;
        }
    }
    record.final_state = Some(y[..n].to_vec());
    record.steps_accepted = stepper.accepted;
    record.steps_rejected = stepper.rejected;
    Ok(record)
}

fn observe(model: &Model, t: f64, y: &[Complex64], mode: &Mode, counts: &[u32; 4]) -> Sample {
    let n = model.dim();
    let psi = &y[..n];
    let d = model.diagnostics();
    let (rho_r, rho_v) = d.populations(psi);
    let p: [f64; 4] = match mode {
        Mode::NoJump => std::array::from_fn(|k| y[n + k].re),
        Mode::Stochastic(_) => counts.map(f64::from),
    };
    Sample {
        t,
        norm: norm_sq(psi),
        rho_r,
        rho_v,
        entropy: entropy(&d.reduced_density(psi)),
        p_e: p[0],
        p_rv: p[1] + p[2],
        p_kappa: p[3],
        n_photons: d.photon_number(psi),
    }
}

/// Deterministic no-jump evolution from the all-ground state.
pub fn evolve_nojump(model: &Model, options: &RunOptions) -> Result<TrajectoryRecord> {
    propagate(model, options, Mode::NoJump)
}

/// One Monte-Carlo wavefunction trajectory, fully determined by `seed`.
pub fn run_trajectory(model: &Model, options: &RunOptions, seed: u64) -> Result<TrajectoryRecord> {
    run_trajectory_with_rng(model, options, ChaCha8Rng::seed_from_u64(seed))
}

pub fn run_trajectory_with_rng(model: &Model, options: &RunOptions, rng: ChaCha8Rng) -> Result<TrajectoryRecord> {
    propagate(model, options, Mode::Stochastic(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::mhz;

    fn small_model(decay: bool) -> Model {
        let mut p = SystemParams { n_atoms: 2, ..SystemParams::five_atom_reference() }.with_stark_compensation();
        if !decay {
            p = p.without_decay();
        }
        Model::new(p, PulseSchedule::adiabatic_passage(2.0, p.omega_max)).unwrap()
    }

    #[test]
    fn effective_hamiltonian_diagonal() {
        let b = BasisIndex::enumerate(2, 2, Enumeration::Full).unwrap();
        let h = OperatorMatrix::zeros(b.len());
        let none = [JumpChannel { kind: ChannelKind::EDecay, rate: 0.0 }];
        assert_eq!(effective_hamiltonian(&h, &none, &b).max_abs(), 0.0);

        let ge = [JumpChannel { kind: ChannelKind::EDecay, rate: 3.0 }];
        let heff = effective_hamiltonian(&h, &ge, &b);
        let i = b.find(&Occupation::new(0, 2, 0, 0, 0, 0, 0)).unwrap();
        assert_eq!(heff.get(i, i), Complex64::new(0.0, -3.0));

        let cav = [JumpChannel { kind: ChannelKind::Cavity, rate: mhz(0.2) }];
        let heff = effective_hamiltonian(&h, &cav, &b);
        let i = b.find(&Occupation::new(2, 0, 0, 0, 0, 0, 1)).unwrap();
        assert!((heff.get(i, i).im + 0.5 * mhz(0.2)).abs() < 1e-15);
    }

    #[test]
    fn jump_factors() {
        let occ = Occupation::new(1, 3, 0, 0, 0, 0, 2);
        let (t, f) = ChannelKind::EDecay.jump(&occ).unwrap();
        assert_eq!(t, Occupation::new(2, 2, 0, 0, 0, 0, 2));
        assert_eq!(f, 3f64.sqrt());
        let (t, f) = ChannelKind::Cavity.jump(&occ).unwrap();
        assert_eq!(t.n, 1);
        assert_eq!(f, 2f64.sqrt());
        assert!(ChannelKind::RDecay.jump(&occ).is_none());
    }

    #[test]
    fn norm_bookkeeping() {
        let m = small_model(true);
        let rec = evolve_nojump(&m, &RunOptions { samples: 200, ..Default::default() }).unwrap();
        let mut last = [0.0; 3];
        for s in &rec.samples {
            assert!((s.norm + s.p_e + s.p_rv + s.p_kappa - 1.0).abs() < 1e-6);
            let now = [s.p_e, s.p_rv, s.p_kappa];
            for (a, b) in now.iter().zip(last) {
                assert!(*a >= b - 1e-15);
            }
            last = now;
        }
    }

    #[test]
    fn zero_rates_give_identical_stochastic_run() {
        let m = small_model(false);
        let opts = RunOptions { samples: 50, ..Default::default() };
        let a = evolve_nojump(&m, &opts).unwrap();
        let b = run_trajectory(&m, &opts, 7).unwrap();
        assert_eq!(a.samples, b.samples);
        assert!(b.jumps.is_empty());
    }

    #[test]
    fn same_seed_same_jumps() {
        let m = small_model(true);
        let opts = RunOptions { samples: 20, ..Default::default() };
        let runs: Vec<_> = (0..2).map(|_| run_trajectory(&m, &opts, 99).unwrap()).collect();
        assert_eq!(runs[0].jumps, runs[1].jumps);
        assert_eq!(runs[0].samples, runs[1].samples);
    }
}
