//! Permutation-symmetric collective basis |G,E,R,V,Q,U⟩⊗|n⟩.
//!
//! A basis state counts how many of the N atoms sit in each of the six
//! single-atom levels, plus the cavity photon number. Collective operators
//! Σ_j |b⟩⟨a|_j act on these labels with Dicke factors √(n_a (n_b + 1)).

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

/// Single-atom level. The discriminant is the slot in [`Occupation::counts`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Level {
    G = 0,
    E = 1,
    R = 2,
    V = 3,
    Q = 4,
    U = 5,
}

impl Level {
    pub const ALL: [Level; 6] = [Level::G, Level::E, Level::R, Level::V, Level::Q, Level::U];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Occupation numbers of the six levels and the photon number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Occupation {
    pub counts: [u32; 6],
    pub n: u32,
}

impl Occupation {
    pub fn new(g: u32, e: u32, r: u32, v: u32, q: u32, u: u32, n: u32) -> Self {
        Self { counts: [g, e, r, v, q, u], n }
    }

    /// All atoms in |g⟩, cavity empty.
    pub fn ground(n_atoms: u32) -> Self {
        Self::new(n_atoms, 0, 0, 0, 0, 0, 0)
    }

    /// |R = N⟩ or |V = N⟩ style states, cavity empty.
    pub fn all_in(level: Level, n_atoms: u32) -> Self {
        let mut counts = [0; 6];
        counts[level.index()] = n_atoms;
        Self { counts, n: 0 }
    }

    pub fn count(&self, level: Level) -> u32 {
        self.counts[level.index()]
    }

    pub fn atoms(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// n + Q − U. Conserved by the atom-cavity coupling and the lasers;
    /// a cavity-photon loss lowers it by one.
    pub fn excitation_charge(&self) -> i64 {
        self.n as i64 + self.count(Level::Q) as i64 - self.count(Level::U) as i64
    }

    /// Deterministic basis ordering key, lexicographic on (n, G, E, R, V, Q, U).
    pub fn sort_key(&self) -> (u32, [u32; 6]) {
        (self.n, self.counts)
    }

    fn with(&self, level: Level, delta: i64) -> Option<Self> {
        let mut out = *self;
        let c = out.counts[level.index()] as i64 + delta;
        if c < 0 {
            return None;
        }
        out.counts[level.index()] = c as u32;
        Some(out)
    }

    fn with_photons(&self, delta: i64) -> Option<Self> {
        let n = self.n as i64 + delta;
        (n >= 0).then(|| Self { n: n as u32, ..*self })
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [g, e, r, v, q, u] = self.counts;
        write!(f, "|G={g},E={e},R={r},V={v},Q={q},U={u}; n={}>", self.n)
    }
}

/// Σ_j |to⟩⟨from|_j on a symmetric state: moves one atom and returns the
/// Dicke factor √(n_from (n_to + 1)). For `from == to` this is the number
/// operator. `None` when `from` is empty.
pub fn collective_transition(occ: &Occupation, from: Level, to: Level) -> Option<(Occupation, f64)> {
    let n_from = occ.count(from);
    if n_from == 0 {
        return None;
    }
    if from == to {
        return Some((*occ, n_from as f64));
    }
    let moved = occ.with(from, -1)?.with(to, 1)?;
    let factor = ((n_from as f64) * (occ.count(to) as f64 + 1.0)).sqrt();
    Some((moved, factor))
}

/// Bosonic annihilator of one level mode: removes an atom (N → N − 1)
/// with factor √(count).
pub fn mode_annihilate(occ: &Occupation, level: Level) -> Option<(Occupation, f64)> {
    let c = occ.count(level);
    (c > 0).then(|| (occ.with(level, -1).unwrap(), (c as f64).sqrt()))
}

/// Bosonic creator of one level mode (N → N + 1), factor √(count + 1).
pub fn mode_create(occ: &Occupation, level: Level) -> (Occupation, f64) {
    let c = occ.count(level);
    (occ.with(level, 1).unwrap(), (c as f64 + 1.0).sqrt())
}

/// Cavity annihilator, factor √n.
pub fn photon_annihilate(occ: &Occupation) -> Option<(Occupation, f64)> {
    (occ.n > 0).then(|| (occ.with_photons(-1).unwrap(), (occ.n as f64).sqrt()))
}

/// Cavity creator, factor √(n + 1).
pub fn photon_create(occ: &Occupation) -> (Occupation, f64) {
    (occ.with_photons(1).unwrap(), (occ.n as f64 + 1.0).sqrt())
}

/// One elementary move of the model, used for reachability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    /// Laser transition (either direction).
    Laser(Level, Level),
    /// r → q absorbing a photon.
    AbsorbRq,
    /// q → r emitting a photon.
    EmitQr,
    /// v → u emitting a photon.
    EmitVu,
    /// u → v absorbing a photon.
    AbsorbUv,
    /// Spontaneous decay of one atom to |g⟩.
    Decay(Level),
    /// Cavity photon loss.
    PhotonLoss,
}

pub const HAMILTONIAN_MOVES: [Move; 10] = [
    Move::Laser(Level::G, Level::E),
    Move::Laser(Level::E, Level::G),
    Move::Laser(Level::E, Level::R),
    Move::Laser(Level::R, Level::E),
    Move::Laser(Level::E, Level::V),
    Move::Laser(Level::V, Level::E),
    Move::AbsorbRq,
    Move::EmitQr,
    Move::EmitVu,
    Move::AbsorbUv,
];

pub const JUMP_MOVES: [Move; 4] =
    [Move::Decay(Level::E), Move::Decay(Level::R), Move::Decay(Level::V), Move::PhotonLoss];

impl Move {
    /// Target state, ignoring amplitudes. `None` if the move is impossible.
    pub fn apply(self, occ: &Occupation) -> Option<Occupation> {
        match self {
            Move::Laser(a, b) => collective_transition(occ, a, b).map(|(o, _)| o),
            Move::AbsorbRq => {
                let (o, _) = collective_transition(occ, Level::R, Level::Q)?;
                photon_annihilate(&o).map(|(o, _)| o)
            }
            Move::EmitQr => collective_transition(occ, Level::Q, Level::R).map(|(o, _)| photon_create(&o).0),
            Move::EmitVu => collective_transition(occ, Level::V, Level::U).map(|(o, _)| photon_create(&o).0),
            Move::AbsorbUv => {
                let (o, _) = collective_transition(occ, Level::U, Level::V)?;
                photon_annihilate(&o).map(|(o, _)| o)
            }
            Move::Decay(level) => collective_transition(occ, level, Level::G).map(|(o, _)| o),
            Move::PhotonLoss => photon_annihilate(occ).map(|(o, _)| o),
        }
    }
}

/// Which states to include.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Enumeration {
    /// Every occupation with G+E+R+V+Q+U = N and n ≤ n_max.
    Full,
    /// Closure of a seed under the Hamiltonian moves, optionally also
    /// under the quantum-jump moves.
    ReachableFrom { seed: Occupation, include_jumps: bool },
}

pub const DEFAULT_CAPACITY: usize = 1 << 20;

/// Ordered list of basis states with a reverse lookup.
#[derive(Debug, Clone)]
pub struct BasisIndex {
    n_atoms: u32,
    n_max: u32,
    states: Vec<Occupation>,
    index: HashMap<Occupation, usize>,
}

fn binomial(n: u64, k: u64) -> u64 {
    (1..=k).fold(1u64, |acc, i| acc * (n + 1 - i) / i)
}

/// Number of states in the unfiltered basis: C(N+5, 5)·(n_max+1).
pub fn full_basis_size(n_atoms: u32, n_max: u32) -> u64 {
    binomial(n_atoms as u64 + 5, 5) * (n_max as u64 + 1)
}

impl BasisIndex {
    pub fn enumerate(n_atoms: u32, n_max: u32, filter: Enumeration) -> Result<Self> {
        Self::enumerate_with_capacity(n_atoms, n_max, filter, DEFAULT_CAPACITY)
    }

    pub fn enumerate_with_capacity(n_atoms: u32, n_max: u32, filter: Enumeration, capacity: usize) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::InvalidParam("atom number must be at least 1".into()));
        }
        let mut states = match filter {
            Enumeration::Full => {
                let size = full_basis_size(n_atoms, n_max);
                if size > capacity as u64 {
                    return Err(Error::Capacity { size: size as usize, limit: capacity });
                }
                let mut states = Vec::with_capacity(size as usize);
                for n in 0..=n_max {
                    compositions(n_atoms, &mut |counts| states.push(Occupation { counts, n }));
                }
                states
            }
            Enumeration::ReachableFrom { seed, include_jumps } => {
                if seed.atoms() != n_atoms || seed.n > n_max {
                    return Err(Error::BasisMismatch(format!("seed {seed} invalid for N = {n_atoms}, n_max = {n_max}")));
                }
                reachable(seed, n_max, include_jumps, capacity)?
            }
        };
        states.sort_by_key(Occupation::sort_key);
        let index = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        Ok(Self { n_atoms, n_max, states, index })
    }

    pub fn n_atoms(&self) -> u32 {
        self.n_atoms
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Occupation] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &Occupation {
        &self.states[i]
    }

    pub fn find(&self, occ: &Occupation) -> Option<usize> {
        self.index.get(occ).copied()
    }

    pub fn require(&self, occ: &Occupation) -> Result<usize> {
        self.find(occ).ok_or_else(|| Error::StateNotInBasis(occ.to_string()))
    }

    /// One JSON object per line: index, G, E, R, V, Q, U, n.
    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        #[derive(Serialize)]
        #[allow(non_snake_case)]
        struct Row {
            index: u64,
            G: u32,
            E: u32,
            R: u32,
            V: u32,
            Q: u32,
            U: u32,
            n: u32,
        }
        for (i, s) in self.states.iter().enumerate() {
            let [g, e, r, v, q, u] = s.counts;
            let row = Row { index: i as u64, G: g, E: e, R: r, V: v, Q: q, U: u, n: s.n };
            serde_json::to_writer(&mut out, &row)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// All ways of distributing `n_atoms` over six levels.
fn compositions(n_atoms: u32, emit: &mut impl FnMut([u32; 6])) {
    fn rec(slot: usize, left: u32, counts: &mut [u32; 6], emit: &mut impl FnMut([u32; 6])) {
        if slot == 5 {
            counts[5] = left;
            emit(*counts);
            return;
        }
        for c in 0..=left {
            counts[slot] = c;
            rec(slot + 1, left - c, counts, emit);
        }
    }
    rec(0, n_atoms, &mut [0; 6], emit);
}

fn reachable(seed: Occupation, n_max: u32, include_jumps: bool, capacity: usize) -> Result<Vec<Occupation>> {
    let mut seen = HashMap::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::from([seed]);
    seen.insert(seed, ());
    order.push(seed);
    let jumps: &[Move] = if include_jumps { &JUMP_MOVES } else { &[] };
    while let Some(occ) = queue.pop_front() {
        for mv in HAMILTONIAN_MOVES.iter().chain(jumps) {
            let Some(next) = mv.apply(&occ) else { continue };
            if next.n > n_max || seen.contains_key(&next) {
                continue;
            }
            if order.len() >= capacity {
                return Err(Error::Capacity { size: order.len() + 1, limit: capacity });
            }
            seen.insert(next, ());
            order.push(next);
            queue.push_back(next);
        }
    }
    Ok(order)
}
