use std::f64::consts::TAU;

use super::{require_nonnegative, require_positive, MechanicsParams, Result, HBAR, K_B};

/// Zero-point displacement amplitude `√(ħ / (2·m·Ω_m))`, meters.
pub fn zero_point_fluctuation(mech: &MechanicsParams) -> Result<f64> {
    require_positive("mass", mech.mass)?;
    require_positive("omega_m", mech.omega_m)?;
    Ok((HBAR / (2.0 * mech.mass * mech.omega_m)).sqrt())
}

/// High-temperature phonon occupation `k_B·T / (ħ·Ω_m)`.
pub fn thermal_occupation(omega_m: f64, temperature: f64) -> Result<f64> {
    require_positive("omega_m", omega_m)?;
    require_positive("temperature", temperature)?;
    Ok(K_B * temperature / (HBAR * omega_m))
}

/// Thermal occupation and thermal coherence time `1 / (n̄·Γ_m)` in seconds.
pub fn thermal_occupation_and_coherence(mech: &MechanicsParams, temperature: f64) -> Result<(f64, f64)> {
    let n = thermal_occupation(mech.omega_m, temperature)?;
    require_positive("gamma_m", mech.gamma_m)?;
    Ok((n, 1.0 / (n * mech.gamma_m)))
}

pub fn mechanical_quality(omega_m: f64, gamma_m: f64) -> Result<f64> {
    require_positive("omega_m", omega_m)?;
    require_positive("gamma_m", gamma_m)?;
    Ok(omega_m / gamma_m)
}

/// How the temperature slope of the frequency noise maps to `g_m0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SlopeConvention {
    /// `⟨δω²⟩ = 2·g_m0²·n̄`, hence `g_m0/2π = √(s·ħΩ_m / (2·k_B))`.
    #[default]
    Corrected,
    /// `g_m0/2π = √(s·ħΩ_m / k_B)` without the factor two. Kept for comparison only.
    Literal,
}

/// Vacuum coupling (rad/s) from the slope of `⟨δω²⟩/(2π)²` versus temperature
/// (Hz²/K).
pub fn vacuum_coupling_from_slope(
    slope_hz2_per_k: f64,
    omega_m: f64,
    convention: SlopeConvention,
) -> Result<f64> {
    require_nonnegative("slope", slope_hz2_per_k)?;
    require_positive("omega_m", omega_m)?;
    let divisor = match convention {
        SlopeConvention::Corrected => 2.0 * K_B,
        SlopeConvention::Literal => K_B,
    };
    Ok(TAU * (slope_hz2_per_k * HBAR * omega_m / divisor).sqrt())
}

/// Slope of `⟨δω²⟩/(2π)²` versus temperature (Hz²/K) for a vacuum coupling `g_m0`.
pub fn slope_from_vacuum_coupling(g_m0: f64, omega_m: f64) -> Result<f64> {
    require_nonnegative("g_m0", g_m0)?;
    require_positive("omega_m", omega_m)?;
    Ok(2.0 * g_m0 * g_m0 * K_B / (HBAR * omega_m * TAU * TAU))
}

/// Integrated frequency noise `⟨δω²⟩` ((rad/s)²) from the thermal/calibration
/// peak-height ratio:
///
/// `⟨δω²⟩ = φ₀²·Ω_mod²·Γ_m / (4·ENBW) · S_pp/S_mod`
///
/// `gamma_m` is angular, `enbw` in Hz.
pub fn integrated_displacement_noise(
    s_pp_over_s_mod: f64,
    phi0: f64,
    omega_mod: f64,
    gamma_m: f64,
    enbw: f64,
) -> Result<f64> {
    require_nonnegative("s_pp_over_s_mod", s_pp_over_s_mod)?;
    Ok(noise_scale(phi0, omega_mod, gamma_m, enbw)? * s_pp_over_s_mod)
}

/// Inverse of [`integrated_displacement_noise`]: the peak ratio producing a given `⟨δω²⟩`.
pub fn peak_ratio_for_noise(
    noise: f64,
    phi0: f64,
    omega_mod: f64,
    gamma_m: f64,
    enbw: f64,
) -> Result<f64> {
    require_nonnegative("noise", noise)?;
    Ok(noise / noise_scale(phi0, omega_mod, gamma_m, enbw)?)
}

fn noise_scale(phi0: f64, omega_mod: f64, gamma_m: f64, enbw: f64) -> Result<f64> {
    require_positive("phi0", phi0)?;
    require_positive("omega_mod", omega_mod)?;
    require_positive("gamma_m", gamma_m)?;
    require_positive("enbw", enbw)?;
    Ok(phi0 * phi0 * omega_mod * omega_mod * gamma_m / (4.0 * enbw))
}
