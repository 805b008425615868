use num_complex::Complex64;

use super::{nearest_index, Result, SynthError, Trace, TraceKind};
use crate::physics::{
    photon_number, thermal_occupation, DriveConfig, ResonatorParams, SystemParams,
};
use crate::units::{hz, to_hz};

/// Phase-modulation calibration tone: modulation index and modulation frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Modulation {
    pub phi0: f64,
    pub omega_mod: f64,
}

impl Modulation {
    /// Tone with frequency deviation `depth` (rad/s), so `φ₀ = depth / Ω_mod`.
    pub fn from_depth(depth: f64, omega_mod: f64) -> Self {
        Self {
            phi0: depth / omega_mod,
            omega_mod,
        }
    }
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { stop } else { start + step * i as f64 })
                .collect()
        }
    }
}

/// Probe window around the absorption dip: `center ± half_width_linewidths·Γ_eff`.
pub fn emia_window(center_hz: f64, gamma_eff_hz: f64, half_width_linewidths: f64, points: usize) -> Vec<f64> {
    let half = half_width_linewidths * gamma_eff_hz;
    linspace(center_hz - half, center_hz + half, points)
}

/// Spectroscopy window around a qubit line.
pub fn qubit_window(center_hz: f64, linewidth_hz: f64, half_width_linewidths: f64, points: usize) -> Vec<f64> {
    let half = half_width_linewidths * linewidth_hz;
    linspace(center_hz - half, center_hz + half, points)
}

/// Spectrum-analyzer window around the mechanical mode.
pub fn psd_window(omega_m_hz: f64, gamma_m_hz: f64, half_width_linewidths: f64, points: usize) -> Vec<f64> {
    let half = half_width_linewidths * gamma_m_hz;
    linspace(omega_m_hz - half, omega_m_hz + half, points)
}

fn lorentzian(half_width: f64, detuning: f64) -> f64 {
    let hw2 = half_width * half_width;
    hw2 / (hw2 + detuning * detuning)
}

/// Bare resonator transmission `|S21|² = (κ/2)² / ((κ/2)² + (ω − ω_c)²)`.
pub fn lorentzian_s21(params: &ResonatorParams, freq_hz: &[f64]) -> Result<Trace> {
    let f_c = to_hz(params.omega_c);
    let values = freq_hz
        .iter()
        .map(|f| lorentzian(0.5 * params.kappa, hz(f - f_c)))
        .collect();
    let mut t = Trace::new(TraceKind::TransmissionPower, freq_hz.to_vec(), values)?;
    t.set_meta_f64("omega_c_rad_s", params.omega_c);
    t.set_meta_f64("kappa_rad_s", params.kappa);
    Ok(t)
}

/// Probe transmission with a red-sideband drive on.
///
/// `S21 = (κ/2) / (κ/2 − iΔ_p + G²/(Γ_m/2 − iδ))` with `G² = g_m0²·n_d`,
/// `δ = ω_p − ω_d − Ω_m` and `n_d` the drive photon number. Returned as
/// `|S21|²`, which is 1 at the bare resonance peak.
pub fn emia_s21(system: &SystemParams, drive: &DriveConfig, kappa: f64, probe_hz: &[f64]) -> Result<Trace> {
    let mech = &system.mechanics;
    drive
        .check_red_sideband(mech.omega_m, mech.gamma_m)
        .map_err(|e| SynthError::Configuration(e.to_string()))?;
    if !(kappa > 0.0 && kappa < mech.omega_m) {
        return Err(SynthError::Configuration(format!(
            "sideband not resolved: kappa = {kappa} rad/s, omega_m = {} rad/s",
            mech.omega_m
        )));
    }
    let n_d = photon_number(drive.p_app, drive.x, drive.omega_d, kappa, drive.delta_mc)?;
    let g2 = mech.g_m0 * mech.g_m0 * n_d;
    let f_c = to_hz(system.resonator.omega_c);
    let f_anti_stokes = to_hz(drive.omega_d) + to_hz(mech.omega_m);
    let half_kappa = 0.5 * kappa;
    let half_gamma = 0.5 * mech.gamma_m;

    let values = probe_hz
        .iter()
        .map(|f| {
            let delta_p = hz(f - f_c);
            if g2 == 0.0 {
                return lorentzian(half_kappa, delta_p);
            }
            let delta = hz(f - f_anti_stokes);
            let mech_response = Complex64::new(g2, 0.0) / Complex64::new(half_gamma, -delta);
            let s21 = half_kappa / (Complex64::new(half_kappa, -delta_p) + mech_response);
            s21.norm_sqr()
        })
        .collect();

    let mut t = Trace::new(TraceKind::TransmissionPower, probe_hz.to_vec(), values)?;
    t.set_meta_f64("omega_c_rad_s", system.resonator.omega_c);
    t.set_meta_f64("kappa_rad_s", kappa);
    t.set_meta_f64("omega_m_rad_s", mech.omega_m);
    t.set_meta_f64("gamma_m_rad_s", mech.gamma_m);
    t.set_meta_f64("g_m0_rad_s", mech.g_m0);
    t.set_meta_f64("p_app_w", drive.p_app);
    t.set_meta_f64("omega_d_rad_s", drive.omega_d);
    t.set_meta_f64("delta_mc_rad_s", drive.delta_mc);
    t.set_meta_f64("x_per_s", drive.x);
    t.set_meta_f64("drive_photons", n_d);
    Ok(t)
}

/// Two-tone spectroscopy response of a qubit line at `line_center` with
/// full width `linewidth` (both rad/s), unit peak height.
pub fn qubit_line(line_center: f64, linewidth: f64, freq_hz: &[f64]) -> Result<Trace> {
    if !(linewidth.is_finite() && linewidth > 0.0) {
        return Err(SynthError::Domain(format!("qubit linewidth {linewidth} must be > 0")));
    }
    let f0 = to_hz(line_center);
    let values = freq_hz
        .iter()
        .map(|f| lorentzian(0.5 * linewidth, hz(f - f0)))
        .collect();
    let mut t = Trace::new(TraceKind::QubitSpectroscopy, freq_hz.to_vec(), values)?;
    t.set_meta_f64("line_center_rad_s", line_center);
    t.set_meta_f64("linewidth_rad_s", linewidth);
    Ok(t)
}

/// Sideband frequency-noise PSD at temperature `temperature`.
///
/// Thermal Lorentzian at Ω_m with FWHM Γ_m and height `S_pp = 4⟨δω²⟩/Γ_m`, so
/// its area over Hz is `⟨δω²⟩ = 2·g_m0²·n̄(T)`. The calibration tone is a
/// single bin of height `S_mod = φ₀²·Ω_mod²/ENBW` at the axis point nearest
/// Ω_mod. Values are (rad/s)²/Hz, baseline zero.
pub fn sideband_psd(
    system: &SystemParams,
    temperature: f64,
    modulation: &Modulation,
    enbw: f64,
    freq_hz: &[f64],
) -> Result<Trace> {
    sideband_psd_with_offset(system, temperature, 0.0, modulation, enbw, freq_hz)
}

/// [`sideband_psd`] with an extra occupation `n_offset` added to the thermal
/// occupation (back-action heating).
pub fn sideband_psd_with_offset(
    system: &SystemParams,
    temperature: f64,
    n_offset: f64,
    modulation: &Modulation,
    enbw: f64,
    freq_hz: &[f64],
) -> Result<Trace> {
    let mech = &system.mechanics;
    if !(enbw.is_finite() && enbw > 0.0) {
        return Err(SynthError::Domain(format!("enbw = {enbw} must be > 0")));
    }
    if !(modulation.phi0 > 0.0 && modulation.omega_mod > 0.0) {
        return Err(SynthError::Domain("modulation index and frequency must be > 0".into()));
    }
    if !(n_offset.is_finite() && n_offset >= 0.0) {
        return Err(SynthError::Domain(format!("occupation offset {n_offset} must be >= 0")));
    }
    let (f_m, f_mod) = (to_hz(mech.omega_m), to_hz(modulation.omega_mod));
    let (lo, hi) = match (freq_hz.first(), freq_hz.last()) {
        (Some(lo), Some(hi)) => (*lo, *hi),
        _ => return Err(SynthError::Domain("empty frequency axis".into())),
    };
    for (name, f) in [("mechanical mode", f_m), ("calibration tone", f_mod)] {
        if f < lo || f > hi {
            return Err(SynthError::Domain(format!(
                "{name} at {f} Hz outside the axis [{lo}, {hi}] Hz"
            )));
        }
    }

    let n_bar = thermal_occupation(mech.omega_m, temperature)? + n_offset;
    let noise = 2.0 * mech.g_m0 * mech.g_m0 * n_bar;
    let s_pp = 4.0 * noise / mech.gamma_m;
    let s_mod = modulation.phi0 * modulation.phi0 * modulation.omega_mod * modulation.omega_mod / enbw;

    let mut values: Vec<f64> = freq_hz
        .iter()
        .map(|f| s_pp * lorentzian(0.5 * mech.gamma_m, hz(f - f_m)))
        .collect();
    values[nearest_index(freq_hz, f_mod)] += s_mod;
    let mut t = Trace::new(TraceKind::Psd, freq_hz.to_vec(), values)?;
    t.set_meta_f64("temperature_k", temperature);
    t.set_meta_f64("occupation", n_bar);
    t.set_meta_f64("omega_m_rad_s", mech.omega_m);
    t.set_meta_f64("gamma_m_rad_s", mech.gamma_m);
    t.set_meta_f64("g_m0_rad_s", mech.g_m0);
    t.set_meta_f64("phi0", modulation.phi0);
    t.set_meta_f64("omega_mod_rad_s", modulation.omega_mod);
    t.set_meta_f64("enbw_hz", enbw);
    Ok(t)
}
