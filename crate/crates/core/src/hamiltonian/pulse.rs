use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// cos² envelope Ω_peak cos²((t − t_c)/β), zero for |t − t_c| ≥ πβ/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    /// Center time in µs.
    pub center: f64,
    /// Temporal width β in µs.
    pub width: f64,
    /// Peak Rabi frequency in rad/µs.
    pub peak: f64,
}

impl Pulse {
    pub fn amplitude(&self, t: f64) -> f64 {
        let phase = (t - self.center) / self.width;
        if phase.abs() >= PI / 2.0 {
            return 0.0;
        }
        let c = phase.cos();
        self.peak * c * c
    }

    /// Support [t_c − πβ/2, t_c + πβ/2].
    pub fn support(&self) -> (f64, f64) {
        let half = PI * self.width / 2.0;
        (self.center - half, self.center + half)
    }
}

pub fn pulse_amplitude(pulse: &Pulse, t: f64) -> f64 {
    pulse.amplitude(t)
}

/// The three laser envelopes on g↔e, e↔r and e↔v.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub ge: Pulse,
    pub er: Pulse,
    pub ev: Pulse,
}

/// Margin added on both sides of the pulse supports, µs.
pub const SPAN_MARGIN: f64 = 0.5;

impl PulseSchedule {
    /// Counter-intuitive ordering with t_er = t_ev = t_eg − β/2, shifted so
    /// the default time span starts at t = 0.
    pub fn adiabatic_passage(beta: f64, omega_max: f64) -> Self {
        let t_rydberg = PI * beta / 2.0 + SPAN_MARGIN;
        Self::with_centers(beta, omega_max, t_rydberg + beta / 2.0, t_rydberg)
    }

    pub fn with_centers(beta: f64, omega_max: f64, t_ge: f64, t_rydberg: f64) -> Self {
        let pulse = |center| Pulse { center, width: beta, peak: omega_max };
        Self { ge: pulse(t_ge), er: pulse(t_rydberg), ev: pulse(t_rydberg) }
    }

    /// (Ω_ge, Ω_er, Ω_ev) at time t.
    pub fn amplitudes(&self, t: f64) -> [f64; 3] {
        [self.ge.amplitude(t), self.er.amplitude(t), self.ev.amplitude(t)]
    }

    fn pulses(&self) -> [Pulse; 3] {
        [self.ge, self.er, self.ev]
    }

    /// Span covering every pulse support plus a fixed margin.
    pub fn default_span(&self) -> (f64, f64) {
        let (lo, hi) = self
            .pulses()
            .iter()
            .map(Pulse::support)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| (lo.min(a), hi.max(b)));
        (lo - SPAN_MARGIN, hi + SPAN_MARGIN)
    }

    /// Support edges, sorted and deduplicated; the integrator steps onto them.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut edges: Vec<f64> = self.pulses().iter().flat_map(|p| {
            let (a, b) = p.support();
            [a, b]
        }).collect();
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        edges
    }
}
