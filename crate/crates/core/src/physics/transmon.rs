use std::f64::consts::PI;

use super::{require_finite, require_nonnegative, require_positive, Result, TransmonParams, HBAR};

/// Anharmonicity from the |g>↔|e> and two-photon |g>↔|f> lines: `α = ω_gf − 2·ω_ge`.
///
/// `omega_gf` is the full |g>↔|f> transition frequency (twice the two-photon
/// drive frequency).
pub fn anharmonicity_from_two_photon(omega_ge: f64, omega_gf: f64) -> Result<f64> {
    require_positive("omega_ge", omega_ge)?;
    require_positive("omega_gf", omega_gf)?;
    Ok(omega_gf - 2.0 * omega_ge)
}

/// Transmon charging energy `E_C = −ħα`, in joules.
pub fn charging_energy(alpha: f64) -> f64 {
    -HBAR * alpha
}

/// `E_J/E_C` from `ħω_q = √(8·E_C·E_J)`.
pub fn ej_ec_ratio(omega_q: f64, e_c: f64) -> Result<f64> {
    require_positive("omega_q", omega_q)?;
    require_positive("e_c", e_c)?;
    let r = HBAR * omega_q / e_c;
    Ok(r * r / 8.0)
}

/// Dressed eigenfrequencies `(ω₋, ω₊)` of a resonator and a transmon coupled
/// with strength `g_tc`.
pub fn normal_mode_frequencies(omega_c: f64, omega_q: f64, g_tc: f64) -> Result<(f64, f64)> {
    require_finite("omega_c", omega_c)?;
    require_finite("omega_q", omega_q)?;
    require_nonnegative("g_tc", g_tc)?;
    let mean = 0.5 * (omega_c + omega_q);
    let half_detuning = 0.5 * (omega_q - omega_c);
    let half_split = g_tc.hypot(half_detuning);
    Ok((mean - half_split, mean + half_split))
}

/// |g>↔|e> frequency of a symmetric-SQUID transmon at reduced flux `Φ/Φ₀`.
///
/// `ħω(Φ) = √(8·E_C·E_J·|cos πΦ/Φ₀|) − E_C`, with `E_J` fixed by the sweet-spot
/// frequency. Near half flux quantum the expression goes negative; it is
/// clamped to zero there and a warning is logged.
pub fn transmon_flux_frequency(transmon: &TransmonParams, flux_ratio: f64) -> Result<f64> {
    require_finite("flux_ratio", flux_ratio)?;
    let e_c = require_positive("e_c", transmon.e_c())?;
    let e_max = HBAR * transmon.omega_q_max;
    let e_j = (e_max + e_c) * (e_max + e_c) / (8.0 * e_c);
    // fold into [0, 1/2] so the period and the mirror symmetry hold exactly
    let reduced = (flux_ratio - flux_ratio.round()).abs();
    let cos = (PI * reduced).cos().abs();
    let energy = (8.0 * e_c * e_j * cos).sqrt() - e_c;
    if energy <= 0.0 {
        log::warn!("transmon frequency model degenerate at flux ratio {flux_ratio}; clamped to 0");
        return Ok(0.0);
    }
    Ok(energy / HBAR)
}
