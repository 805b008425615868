use serde::{Deserialize, Serialize};

use super::{lorentzian_fit, FitError, LorentzianFitResult, LorentzianParams, Result};
use crate::synth::Trace;
use crate::units::hz;

/// Bins on either side of the calibration-tone hint searched for the tone and
/// excluded from the thermal-peak fit.
pub const SPUR_SEARCH_BINS: usize = 2;

/// Thermal-peak to calibration-tone comparison of a sideband PSD.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakRatio {
    pub s_pp_over_s_mod: f64,
    /// Mechanical linewidth from the thermal peak, rad/s.
    pub gamma_m: f64,
    pub gamma_m_sigma: f64,
    /// Mechanical frequency from the thermal peak, rad/s.
    pub omega_m: f64,
    pub s_pp: f64,
    pub s_mod: f64,
    pub s_mod_sigma: f64,
    pub thermal_fit: LorentzianFitResult,
}

impl PeakRatio {
    /// Relative 1σ uncertainty of `Γ_m·S_pp/S_mod`, the combination the
    /// integrated frequency noise is proportional to.
    pub fn noise_relative_sigma(&self) -> f64 {
        let c = &self.thermal_fit.covariance;
        let (a, w) = (self.thermal_fit.amplitude, self.thermal_fit.fwhm);
        let rel_area = c[2][2] / (a * a) + c[1][1] / (w * w) + 2.0 * c[1][2] / (a * w);
        let rel_mod = (self.s_mod_sigma / self.s_mod).powi(2);
        (rel_area.max(0.0) + rel_mod).sqrt()
    }
}

/// Measures the thermal peak near `omega_m_hint_hz` and the single-bin
/// calibration tone near `omega_mod_hint_hz`.
///
/// The thermal peak is fitted with the tone bins removed; the tone height is
/// the largest value within ±2 bins of the hint minus the thermal tail there.
/// The tone's relative noise is taken from the relative scatter of the
/// thermal-fit residuals near the peak.
pub fn psd_peak_ratio(trace: &Trace, omega_m_hint_hz: f64, omega_mod_hint_hz: f64, enbw: f64) -> Result<PeakRatio> {
    if !(enbw.is_finite() && enbw > 0.0) {
        return Err(FitError::Degenerate(format!("enbw = {enbw} must be > 0")));
    }
    for (name, f) in [("mechanical", omega_m_hint_hz), ("calibration", omega_mod_hint_hz)] {
        if !trace.covers(f) {
            return Err(FitError::Resolution(format!("{name} hint {f} Hz outside the trace")));
        }
    }
    let hint = trace.nearest_index(omega_mod_hint_hz);
    let lo = hint.saturating_sub(SPUR_SEARCH_BINS);
    let hi = (hint + SPUR_SEARCH_BINS).min(trace.len() - 1);
    let spur = (lo..=hi)
        .max_by(|a, b| trace.values()[*a].total_cmp(&trace.values()[*b]))
        .unwrap_or(hint);

    let thermal = trace.without_indices(lo..=hi)?;
    let fit = lorentzian_fit(&thermal, None)?.require_converged()?;
    if (fit.center - omega_m_hint_hz).abs() > 0.5 * (trace.freq_hz()[trace.len() - 1] - trace.freq_hz()[0]) {
        return Err(FitError::Resolution(format!(
            "thermal peak fitted at {} Hz, far from the hint {omega_m_hint_hz} Hz",
            fit.center
        )));
    }
    let separation = (fit.center - trace.freq_hz()[spur]).abs();
    if separation <= 3.0 * fit.fwhm {
        return Err(FitError::Resolution(format!(
            "thermal peak and calibration tone {separation} Hz apart, need > 3 linewidths ({} Hz)",
            3.0 * fit.fwhm
        )));
    }

    let model = fit.params();
    let raw = trace.values()[spur];
    let s_mod = raw - model.eval(trace.freq_hz()[spur]);
    if !(s_mod > 0.0) {
        return Err(FitError::Resolution("no calibration tone above the thermal background".into()));
    }
    let relative_noise = relative_scatter_near_peak(&thermal, &model);
    let s_pp = fit.amplitude;
    Ok(PeakRatio {
        s_pp_over_s_mod: s_pp / s_mod,
        gamma_m: hz(fit.fwhm),
        gamma_m_sigma: hz(fit.fwhm_sigma()),
        omega_m: hz(fit.center),
        s_pp,
        s_mod,
        s_mod_sigma: relative_noise * raw,
        thermal_fit: fit,
    })
}

/// rms of `(data − model)/model` over points above half the peak height.
fn relative_scatter_near_peak(trace: &Trace, model: &LorentzianParams) -> f64 {
    let threshold = model.offset + 0.5 * model.amplitude;
    let (sum, count) = trace
        .freq_hz()
        .iter()
        .zip(trace.values())
        .filter_map(|(f, v)| {
            let m = model.eval(*f);
            (m > threshold && m > 0.0).then(|| ((v - m) / m).powi(2))
        })
        .fold((0.0, 0usize), |(s, c), r| (s + r, c + 1));
    if count < 3 {
        0.0
    } else {
        (sum / (count - 1) as f64).sqrt()
    }
}
