//! Photon-number calibration from the electromechanically induced absorption
//! linewidth.
//!
//! Each dip is fitted for `Γ_eff`, which is regressed against
//! `u = 4·g_m0²·n_d(x = 1)/κ`: the slope is `x` and the intercept `Γ_m`.
//! Using `u` rather than the bare power keeps the model exactly linear when κ
//! changes with the drive.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::config::{EmiaSettings, Experiment};
use super::qubit::photon_range;
use super::report::{
    AngularQuantity, CalibrationReport, ExcludedPoint, PointRecord, Regression, XEstimate,
    REPORT_SCHEMA,
};
use super::traces::trace_setpoints;
use super::{floored_points, half_difference, PipelineError, Result};
use crate::fit::{lorentzian_fit, weighted_line_fit, FitError};
use crate::physics::{emia_drive_regressor, photon_number};
use crate::synth::Trace;
use crate::units::hz;

struct DipPoint {
    index: usize,
    p_app: f64,
    kappa: f64,
    gamma_eff: f64,
    gamma_eff_sigma: f64,
    depth: f64,
    center_hz: f64,
    residual_rms: f64,
}

pub(crate) fn calibrate(exp: &Experiment, e: &EmiaSettings, traces: &[Trace], digest: String) -> Result<CalibrationReport> {
    let setpoints = trace_setpoints(exp, traces)?;
    let sys = &exp.system;
    let omega_m = sys.mechanics.omega_m;
    let omega_d = sys.resonator.omega_c - omega_m;
    let delta_mc = -omega_m;

    let fitted: Vec<DipPoint> = traces
        .par_iter()
        .zip(&setpoints)
        .enumerate()
        .map(|(index, (t, &p_app))| {
            let fit = lorentzian_fit(t, None)?.require_converged()?;
            if fit.amplitude >= 0.0 {
                return Err(PipelineError::Fit(FitError::Degenerate(format!(
                    "trace {index}: fitted a peak, expected an absorption dip"
                ))));
            }
            Ok(DipPoint {
                index,
                p_app,
                kappa: exp.kappa_model.kappa_at_power(p_app)?,
                gamma_eff: hz(fit.fwhm),
                gamma_eff_sigma: hz(fit.fwhm_sigma()),
                depth: -fit.amplitude / fit.offset,
                center_hz: fit.center,
                residual_rms: fit.residual_rms,
            })
        })
        .collect::<Result<_>>()?;

    let mut excluded = Vec::new();
    let mut points = Vec::new();
    for p in fitted {
        let limit = e.max_linewidth_fraction_of_kappa * p.kappa;
        if p.gamma_eff > limit {
            let reason = format!(
                "dip width {:.4e} rad/s exceeds {} of kappa ({:.4e} rad/s)",
                p.gamma_eff, e.max_linewidth_fraction_of_kappa, limit
            );
            log::warn!("excluding point {} at {:e} W: {reason}", p.index, p.p_app);
            excluded.push(ExcludedPoint {
                index: p.index,
                setpoint: p.p_app,
                reason,
            });
        } else {
            points.push(p);
        }
    }
    if points.len() < 2 {
        return Err(PipelineError::Fit(FitError::InsufficientPoints(points.len())));
    }

    let regress = |g_m0: f64, kappa_shift: f64| -> Result<_> {
        let raw = points
            .iter()
            .map(|p| {
                let u = emia_drive_regressor(p.p_app, g_m0, p.kappa + kappa_shift, omega_d, delta_mc)?;
                Ok((u, p.gamma_eff, p.gamma_eff_sigma))
            })
            .collect::<Result<Vec<_>>>()?;
        let pts = floored_points(&raw);
        Ok((weighted_line_fit(&pts)?, pts))
    };
    let g_m0 = sys.mechanics.g_m0;
    let (line, line_points) = regress(g_m0, 0.0)?;
    let x = line.slope;
    if !(x > 0.0) {
        return Err(PipelineError::Fit(FitError::Degenerate(format!(
            "recovered x = {x} is not positive"
        ))));
    }

    let u = &exp.uncertainties;
    let mut components = BTreeMap::new();
    if u.g_m0 > 0.0 {
        let c = half_difference(|s| Ok(regress(g_m0 + s * u.g_m0, 0.0)?.0.slope))?;
        components.insert("g_m0".to_string(), c);
    }
    if u.kappa > 0.0 {
        let c = half_difference(|s| Ok(regress(g_m0, s * u.kappa)?.0.slope))?;
        components.insert("kappa".to_string(), c);
    }

    let records = points
        .iter()
        .zip(&line_points)
        .map(|(p, lp)| {
            let mut details = BTreeMap::new();
            details.insert("kappa_rad_s".into(), p.kappa);
            details.insert("gamma_eff_rad_s".into(), p.gamma_eff);
            details.insert("dip_depth".into(), p.depth);
            details.insert("dip_center_hz".into(), p.center_hz);
            details.insert("fit_residual_rms".into(), p.residual_rms);
            Ok(PointRecord {
                index: p.index,
                setpoint: p.p_app,
                regressor: lp.x,
                observable: lp.y,
                observable_sigma: lp.sigma.unwrap_or(0.0),
                photons: Some(photon_number(p.p_app, x, omega_d, p.kappa, delta_mc)?),
                details,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(CalibrationReport {
        schema: REPORT_SCHEMA.into(),
        pipeline: exp.pipeline,
        inputs_digest: digest,
        setpoint_unit: "W".into(),
        regression: Regression::from_fit(
            "gamma_eff_rad_s vs drive_regressor_rad_s2",
            &line,
            "s (= x)",
            "rad/s (= gamma_m)",
        ),
        x: Some(XEstimate::new(x, line.slope_sigma, components)),
        gamma_m: Some(AngularQuantity::new(line.intercept, line.intercept_sigma)),
        g_m0: None,
        thermal_slope_hz2_per_k: None,
        occupation_offset: None,
        photon_range: photon_range(&records),
        points: records,
        excluded,
        notes: vec![
            "drive_regressor = 4 g_m0^2 n_d(x=1) / kappa, so gamma_eff = gamma_m + x * drive_regressor".into(),
            "x sigma adds declared parameter uncertainties in quadrature; correlations neglected".into(),
        ],
    })
}
