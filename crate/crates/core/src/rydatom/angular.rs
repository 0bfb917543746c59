//! Wigner 3-j and 6-j symbols (Racah formulas) and the π-transition angular
//! factor in the coupled |l j m_j⟩ basis.
//!
//! All angular momenta are passed doubled, so half-integers stay exact.

fn factorial(n: i32) -> f64 {
    debug_assert!(n >= 0);
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn parity(k: i32) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn triangle(a2: i32, b2: i32, c2: i32) -> Option<f64> {
    if c2 < (a2 - b2).abs() || c2 > a2 + b2 || (a2 + b2 + c2) % 2 != 0 {
        return None;
    }
    let (a, b, c) = ((a2 + b2 - c2) / 2, (a2 - b2 + c2) / 2, (-a2 + b2 + c2) / 2);
    Some(factorial(a) * factorial(b) * factorial(c) / factorial((a2 + b2 + c2) / 2 + 1))
}

/// Wigner 3-j symbol with doubled arguments.
pub fn wigner_3j(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> f64 {
    if m1 + m2 + m3 != 0 || m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return 0.0;
    }
    if (j1 + m1) % 2 != 0 || (j2 + m2) % 2 != 0 || (j3 + m3) % 2 != 0 {
        return 0.0;
    }
    let Some(delta) = triangle(j1, j2, j3) else {
        return 0.0;
    };
    let pre = (delta
        * factorial((j1 + m1) / 2)
        * factorial((j1 - m1) / 2)
        * factorial((j2 + m2) / 2)
        * factorial((j2 - m2) / 2)
        * factorial((j3 + m3) / 2)
        * factorial((j3 - m3) / 2))
        .sqrt();

    let k_min = 0.max((j2 - j3 - m1) / 2).max((j1 - j3 + m2) / 2);
    let k_max = ((j1 + j2 - j3) / 2).min((j1 - m1) / 2).min((j2 + m2) / 2);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let denom = factorial(k)
            * factorial((j3 - j2 + m1) / 2 + k)
            * factorial((j3 - j1 - m2) / 2 + k)
            * factorial((j1 + j2 - j3) / 2 - k)
            * factorial((j1 - m1) / 2 - k)
            * factorial((j2 + m2) / 2 - k);
        sum += parity(k) / denom;
    }
    parity((j1 - j2 - m3) / 2) * pre * sum
}

/// Wigner 6-j symbol {j1 j2 j3; j4 j5 j6} with doubled arguments.
pub fn wigner_6j(j1: i32, j2: i32, j3: i32, j4: i32, j5: i32, j6: i32) -> f64 {
    let triads = [(j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3)];
    let mut deltas = 1.0;
    for &(a, b, c) in &triads {
        match triangle(a, b, c) {
            Some(d) => deltas *= d,
            None => return 0.0,
        }
    }
    let sums = triads.map(|(a, b, c)| (a + b + c) / 2);
    let pairs = [
        (j1 + j2 + j4 + j5) / 2,
        (j2 + j3 + j5 + j6) / 2,
        (j3 + j1 + j6 + j4) / 2,
    ];
    let k_min = *sums.iter().max().unwrap();
    let k_max = *pairs.iter().min().unwrap();
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let mut denom = 1.0;
        for s in sums {
            denom *= factorial(k - s);
        }
        for p in pairs {
            denom *= factorial(p - k);
        }
        sum += parity(k) * factorial(k + 1) / denom;
    }
    deltas.sqrt() * sum
}

/// ⟨l j m_j| cos θ |l' j' m_j'⟩ for a spin-1/2 electron; multiply by the
/// radial integral ∫u u' r dr to get ⟨z⟩. Exactly zero when selection
/// rules forbid the transition.
pub fn pi_angular_factor(l: u32, j2: u32, mj2: i32, lp: u32, jp2: u32, mjp2: i32) -> f64 {
    if mj2 != mjp2 || l.abs_diff(lp) != 1 {
        return 0.0;
    }
    let (l, lp) = (l as i32, lp as i32);
    let (j2, jp2) = (j2 as i32, jp2 as i32);
    let (l2, lp2) = (2 * l, 2 * lp);

    let m_part = parity((j2 - mj2) / 2) * wigner_3j(j2, 2, jp2, -mj2, 0, mjp2);
    let j_part = parity((l2 + 1 + jp2 + 2) / 2)
        * (((j2 + 1) * (jp2 + 1)) as f64).sqrt()
        * wigner_6j(l2, j2, 1, jp2, lp2, 2);
    let l_part = parity(l) * (((2 * l + 1) * (2 * lp + 1)) as f64).sqrt() * wigner_3j(l2, 2, lp2, 0, 0, 0);
    m_part * j_part * l_part
}
