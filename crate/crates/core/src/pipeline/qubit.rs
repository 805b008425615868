//! Photon-number calibration from the ac-Stark shift.
//!
//! With the probe on resonance, `δω·κ² = k·x·P` where `k` depends only on the
//! transmon parameters and the probe frequency, so the slope of `δω·κ²`
//! against applied power gives `x` directly.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::config::{Experiment, QubitSettings};
use super::report::{CalibrationReport, PhotonRange, PointRecord, Regression, XEstimate, REPORT_SCHEMA};
use super::traces::{check_critical, trace_setpoints};
use super::{floored_points, half_difference, PipelineError, Result};
use crate::fit::{lorentzian_fit, weighted_line_fit};
use crate::physics::{photon_number, stark_slope_per_x, TransmonParams};
use crate::synth::Trace;
use crate::units::hz;

struct StarkPoint {
    p_app: f64,
    kappa: f64,
    shift: f64,
    shift_sigma: f64,
    center_hz: f64,
    fwhm_hz: f64,
    residual_rms: f64,
}

pub(crate) fn calibrate(exp: &Experiment, q: &QubitSettings, traces: &[Trace], digest: String) -> Result<CalibrationReport> {
    let setpoints = trace_setpoints(exp, traces)?;
    let points: Vec<StarkPoint> = traces
        .par_iter()
        .zip(&setpoints)
        .map(|(t, &p_app)| {
            let fit = lorentzian_fit(t, None)?.require_converged()?;
            Ok(StarkPoint {
                p_app,
                kappa: exp.kappa_model.kappa_at_power(p_app)?,
                shift: hz(fit.center) - q.omega_q0,
                shift_sigma: hz(fit.center_sigma()),
                center_hz: fit.center,
                fwhm_hz: fit.fwhm,
                residual_rms: fit.residual_rms,
            })
        })
        .collect::<Result<_>>()?;

    let regress = |kappa_shift: f64| {
        let raw: Vec<(f64, f64, f64)> = points
            .iter()
            .map(|p| {
                let k2 = (p.kappa + kappa_shift).powi(2);
                (p.p_app, p.shift * k2, p.shift_sigma * k2)
            })
            .collect();
        weighted_line_fit(&floored_points(&raw))
    };
    let sys = &exp.system;
    let x_for = |fit_slope: f64, transmon: &TransmonParams| -> Result<f64> {
        Ok(fit_slope / stark_slope_per_x(transmon, sys.delta_tc, q.omega_p)?)
    };

    let line = regress(0.0)?;
    let k = stark_slope_per_x(&sys.transmon, sys.delta_tc, q.omega_p)?;
    let x = line.slope / k;
    if !(x > 0.0) {
        return Err(PipelineError::Fit(crate::fit::FitError::Degenerate(format!(
            "recovered x = {x} is not positive; the Stark shift has the wrong sign"
        ))));
    }
    let sigma_stat = line.slope_sigma / k.abs();

    let u = &exp.uncertainties;
    let mut components = BTreeMap::new();
    if u.g_tc > 0.0 {
        let c = half_difference(|s| {
            x_for(line.slope, &TransmonParams { g_tc: sys.transmon.g_tc + s * u.g_tc, ..sys.transmon })
        })?;
        components.insert("g_tc".to_string(), c);
    }
    if u.alpha > 0.0 {
        let c = half_difference(|s| {
            x_for(line.slope, &TransmonParams { alpha: sys.transmon.alpha + s * u.alpha, ..sys.transmon })
        })?;
        components.insert("alpha".to_string(), c);
    }
    if u.kappa > 0.0 {
        let c = half_difference(|s| x_for(regress(s * u.kappa)?.slope, &sys.transmon))?;
        components.insert("kappa".to_string(), c);
    }

    let mut records = Vec::with_capacity(points.len());
    let floored = floored_points(
        &points
            .iter()
            .map(|p| (p.p_app, p.shift * p.kappa * p.kappa, p.shift_sigma * p.kappa * p.kappa))
            .collect::<Vec<_>>(),
    );
    for (i, (p, lp)) in points.iter().zip(&floored).enumerate() {
        let n = photon_number(p.p_app, x, q.omega_p, p.kappa, 0.0)?;
        check_critical(exp, p.p_app, n)?;
        let mut details = BTreeMap::new();
        details.insert("kappa_rad_s".into(), p.kappa);
        details.insert("stark_shift_rad_s".into(), p.shift);
        details.insert("stark_shift_sigma_rad_s".into(), p.shift_sigma);
        details.insert("line_center_hz".into(), p.center_hz);
        details.insert("line_fwhm_hz".into(), p.fwhm_hz);
        details.insert("fit_residual_rms".into(), p.residual_rms);
        records.push(PointRecord {
            index: i,
            setpoint: p.p_app,
            regressor: lp.x,
            observable: lp.y,
            observable_sigma: lp.sigma.unwrap_or(0.0),
            photons: Some(n),
            details,
        });
    }
    let photon_range = photon_range(&records);

    let slope_per_2pi3_nw = line.slope * 1e-9 / std::f64::consts::TAU.powi(3);
    Ok(CalibrationReport {
        schema: REPORT_SCHEMA.into(),
        pipeline: exp.pipeline,
        inputs_digest: digest,
        setpoint_unit: "W".into(),
        regression: Regression::from_fit(
            "stark_shift_times_kappa_squared_rad3_per_s3 vs p_app_w",
            &line,
            "rad^3/(s^3 W)",
            "rad^3/s^3",
        ),
        x: Some(XEstimate::new(x, sigma_stat, components)),
        gamma_m: None,
        g_m0: None,
        thermal_slope_hz2_per_k: None,
        occupation_offset: None,
        photon_range,
        points: records,
        excluded: vec![],
        notes: vec![
            format!("slope / (2pi)^3 = {slope_per_2pi3_nw:e} 1/(s^3 nW)"),
            "x sigma adds declared parameter uncertainties in quadrature; correlations neglected".into(),
        ],
    })
}

pub(crate) fn photon_range(records: &[PointRecord]) -> Option<PhotonRange> {
    let photons = records.iter().filter_map(|r| r.photons);
    let min = photons.clone().fold(f64::INFINITY, f64::min);
    let max = photons.fold(f64::NEG_INFINITY, f64::max);
    (min.is_finite() && max.is_finite()).then_some(PhotonRange { min, max })
}
