use super::{
    require_finite, require_nonnegative, require_positive, MechanicsParams, PhysicsError, Result,
    TransmonParams, HBAR,
};

/// Mean intra-resonator photon number for a tone of power `p_app` at
/// frequency `omega`, detuned by `delta` from a resonator of linewidth `kappa`.
///
/// `n = 2·P·x / (ħ·ω·(κ² + 4Δ²))`
pub fn photon_number(p_app: f64, x: f64, omega: f64, kappa: f64, delta: f64) -> Result<f64> {
    require_nonnegative("p_app", p_app)?;
    require_positive("x", x)?;
    require_positive("omega", omega)?;
    require_positive("kappa", kappa)?;
    require_finite("delta", delta)?;
    Ok(2.0 * p_app * x / (HBAR * omega * (kappa * kappa + 4.0 * delta * delta)))
}

/// Qubit frequency shift per resonator photon, `2·(g²/Δ)·α/(α+Δ)`.
pub fn dispersive_shift_per_photon(transmon: &TransmonParams, delta_tc: f64) -> Result<f64> {
    require_finite("delta_tc", delta_tc)?;
    if delta_tc == 0.0 {
        return Err(PhysicsError::Singularity("delta_tc = 0"));
    }
    let sum = transmon.alpha + delta_tc;
    if sum == 0.0 {
        return Err(PhysicsError::Singularity("alpha + delta_tc = 0"));
    }
    let g = transmon.g_tc;
    Ok(2.0 * (g * g / delta_tc) * (transmon.alpha / sum))
}

/// ac-Stark shift of the transmon for `n` resonator photons (probe on resonance).
pub fn ac_stark_shift(n: f64, transmon: &TransmonParams, delta_tc: f64) -> Result<f64> {
    require_nonnegative("n", n)?;
    Ok(dispersive_shift_per_photon(transmon, delta_tc)? * n)
}

/// Slope `d(δω·κ²)/dP` per unit calibration factor.
///
/// With the probe on resonance κ² cancels between the Stark shift and the
/// photon number, so `δω·κ² = stark_slope_per_x · x · P` regardless of how κ
/// varies with power.
pub fn stark_slope_per_x(transmon: &TransmonParams, delta_tc: f64, omega_p: f64) -> Result<f64> {
    require_positive("omega_p", omega_p)?;
    Ok(2.0 * dispersive_shift_per_photon(transmon, delta_tc)? / (HBAR * omega_p))
}

/// Electromechanical cooperativity `C = 4·g_m0²·n_d / (κ·Γ_m)`.
pub fn cooperativity(n_d: f64, mech: &MechanicsParams, kappa: f64) -> Result<f64> {
    require_nonnegative("n_d", n_d)?;
    require_positive("kappa", kappa)?;
    require_positive("gamma_m", mech.gamma_m)?;
    Ok(4.0 * mech.g_m0 * mech.g_m0 * n_d / (kappa * mech.gamma_m))
}

/// Effective mechanical linewidth under a red-sideband drive, `Γ_m·(1 + C)`.
pub fn emia_effective_linewidth(
    p_app: f64,
    x: f64,
    mech: &MechanicsParams,
    kappa: f64,
    omega_d: f64,
    delta_mc: f64,
) -> Result<f64> {
    let n_d = photon_number(p_app, x, omega_d, kappa, delta_mc)?;
    let c = cooperativity(n_d, mech, kappa)?;
    Ok(mech.gamma_m * (1.0 + c))
}

/// Linear regressor `u` with `Γ_eff = Γ_m + x·u`.
///
/// `u = 4·g_m0²·n_d(x = 1) / κ`. For constant κ this is proportional to the
/// applied power; when κ depends on power it absorbs that dependence so the
/// linewidth stays exactly linear in `x`.
pub fn emia_drive_regressor(
    p_app: f64,
    g_m0: f64,
    kappa: f64,
    omega_d: f64,
    delta_mc: f64,
) -> Result<f64> {
    require_positive("g_m0", g_m0)?;
    let n_unit = photon_number(p_app, 1.0, omega_d, kappa, delta_mc)?;
    Ok(4.0 * g_m0 * g_m0 * n_unit / kappa)
}

/// Onset of the breakdown of the dispersive approximation, `Δ²/(2g)²`.
pub fn critical_photon_number(g_tc: f64, delta_tc: f64) -> Result<f64> {
    require_positive("g_tc", g_tc)?;
    require_finite("delta_tc", delta_tc)?;
    let ratio = delta_tc / (2.0 * g_tc);
    Ok(ratio * ratio)
}
