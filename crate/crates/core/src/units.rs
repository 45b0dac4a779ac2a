//! Unit conversions. Internally every frequency is an angular frequency in
//! rad/s and every time is in seconds.

use std::f64::consts::TAU;

/// Speed of light in vacuum (m/s), exact.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn thz(f: f64) -> f64 {
    TAU * f * 1e12
}

pub fn ghz(f: f64) -> f64 {
    TAU * f * 1e9
}

pub fn mhz(f: f64) -> f64 {
    TAU * f * 1e6
}

pub fn khz(f: f64) -> f64 {
    TAU * f * 1e3
}

pub fn hz(f: f64) -> f64 {
    TAU * f
}

/// Angular frequency (rad/s) of light with vacuum wavelength `lambda` (m).
pub fn omega_from_wavelength(lambda: f64) -> f64 {
    TAU * SPEED_OF_LIGHT / lambda
}

pub fn wavelength_from_omega(omega: f64) -> f64 {
    TAU * SPEED_OF_LIGHT / omega
}

/// Angular-frequency width matching a wavelength width `d_lambda` around `lambda`
/// (first order: dω = 2πc·dλ/λ²).
pub fn omega_width_from_wavelength(d_lambda: f64, lambda: f64) -> f64 {
    TAU * SPEED_OF_LIGHT * d_lambda / (lambda * lambda)
}

/// Inverse of [`omega_width_from_wavelength`].
pub fn wavelength_width_from_omega(d_omega: f64, lambda: f64) -> f64 {
    lambda * lambda * d_omega / (TAU * SPEED_OF_LIGHT)
}
