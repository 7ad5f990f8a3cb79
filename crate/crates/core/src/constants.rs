//! Physical constants (SI, exact 2019 redefinition values) and unit helpers.

use std::f64::consts::TAU;

/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = PLANCK / TAU;

/// Angular frequency (rad/s) of an ordinary frequency given in hertz.
#[inline]
pub fn angular(f_hz: f64) -> f64 {
    TAU * f_hz
}

/// Ordinary frequency (Hz) of an angular frequency.
#[inline]
pub fn ordinary(omega: f64) -> f64 {
    omega / TAU
}

/// `ħω / k_B` in kelvin.
#[inline]
pub fn quantum_temperature(omega: f64) -> f64 {
    HBAR * omega / BOLTZMANN
}
