//! Angular/ordinary frequency conversions.
//!
//! Internally everything is angular. Anything a human reads or writes
//! (config keys, CSV axes, report convenience fields) is ordinary frequency.

use std::f64::consts::TAU;

/// Ordinary frequency (Hz) to angular frequency (rad/s).
#[inline]
pub fn hz(f: f64) -> f64 {
    TAU * f
}

/// Angular frequency (rad/s) to ordinary frequency (Hz).
#[inline]
pub fn to_hz(omega: f64) -> f64 {
    omega / TAU
}

pub const NANO: f64 = 1e-9;
pub const MILLI: f64 = 1e-3;
pub const PICO: f64 = 1e-12;
