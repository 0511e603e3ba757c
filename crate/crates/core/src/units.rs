//! Unit helpers. Rates are angular internally; tables quote `rate / 2π` in Hz.

use std::f64::consts::PI;

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;

/// `2π · f`.
#[inline]
pub fn two_pi(hz: f64) -> f64 {
    2.0 * PI * hz
}

/// `ω / 2π`.
#[inline]
pub fn per_two_pi(rad_per_s: f64) -> f64 {
    rad_per_s / (2.0 * PI)
}

pub const MS: f64 = 1e-3;
pub const US: f64 = 1e-6;
pub const NS: f64 = 1e-9;
pub const KHZ: f64 = 1e3;
pub const MHZ: f64 = 1e6;
pub const GHZ: f64 = 1e9;
