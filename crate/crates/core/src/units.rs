//! Physical constants (CODATA 2018, SI) and unit conversions.
//!
//! Everything downstream of the atomic front-end works in rad/µs and µs.
//! Configuration files quote ordinary frequencies in MHz, meaning the
//! angular frequency is `2π × value`.

use std::f64::consts::TAU;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Ordinary frequency in MHz to angular frequency in rad/µs.
pub fn mhz(f: f64) -> f64 {
    TAU * f
}

/// Angular frequency in rad/µs back to ordinary MHz.
pub fn to_mhz(w: f64) -> f64 {
    w / TAU
}

/// rad/s to rad/µs.
pub fn per_us(w_rad_s: f64) -> f64 {
    w_rad_s * 1e-6
}

/// rad/µs to rad/s.
pub fn per_s(w_rad_us: f64) -> f64 {
    w_rad_us * 1e6
}
