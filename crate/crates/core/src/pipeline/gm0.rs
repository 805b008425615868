//! Vacuum-coupling calibration from the thermal motion of the string.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rayon::prelude::*;

use super::config::{Experiment, Gm0Settings};
use super::report::{AngularQuantity, CalibrationReport, PointRecord, Quantity, Regression, REPORT_SCHEMA};
use super::traces::trace_setpoints;
use super::{floored_points, PipelineError, Result};
use crate::fit::{psd_peak_ratio, weighted_line_fit, FitError};
use crate::physics::{integrated_displacement_noise, vacuum_coupling_from_slope};
use crate::synth::Trace;
use crate::units::to_hz;

/// Fewest temperature points accepted.
pub const MIN_TEMPERATURES: usize = 3;

pub(crate) fn calibrate(exp: &Experiment, g: &Gm0Settings, traces: &[Trace], digest: String) -> Result<CalibrationReport> {
    let temps = trace_setpoints(exp, traces)?;
    let mech = &exp.system.mechanics;
    let f_m = to_hz(mech.omega_m);
    let f_mod = to_hz(g.omega_mod);

    let measured: Vec<_> = traces
        .par_iter()
        .map(|t| {
            let r = psd_peak_ratio(t, f_m, f_mod, g.enbw)?;
            let noise = integrated_displacement_noise(r.s_pp_over_s_mod, g.phi0, g.omega_mod, r.gamma_m, g.enbw)?;
            let noise_hz2 = noise / (TAU * TAU);
            Ok((r.clone(), noise_hz2, noise_hz2 * r.noise_relative_sigma()))
        })
        .collect::<Result<_>>()?;

    let distinct = {
        let mut t = temps.clone();
        t.sort_by(f64::total_cmp);
        t.dedup();
        t.len()
    };
    if distinct < 2 {
        return Err(PipelineError::Fit(FitError::Degenerate(
            "all temperatures identical, slope undefined".into(),
        )));
    }
    if temps.len() < MIN_TEMPERATURES {
        return Err(PipelineError::Fit(FitError::InsufficientPoints(temps.len())));
    }

    let raw: Vec<_> = temps
        .iter()
        .zip(&measured)
        .map(|(t, (_, y, s))| (*t, *y, *s))
        .collect();
    let line_points = floored_points(&raw);
    let line = weighted_line_fit(&line_points)?;
    let slope = line.slope;
    let g_m0 = vacuum_coupling_from_slope(slope.max(0.0), mech.omega_m, g.convention)?;
    let g_m0_sigma = if slope > 0.0 { 0.5 * g_m0 * line.slope_sigma / slope } else { 0.0 };

    // intercept = 2 g² n_offset / (2π)²
    let occ_scale = TAU * TAU / (2.0 * g_m0 * g_m0);
    let occupation_offset = if g_m0 > 0.0 {
        Some(Quantity {
            value: line.intercept * occ_scale,
            sigma: line.intercept_sigma * occ_scale,
        })
    } else {
        None
    };

    let records = temps
        .iter()
        .zip(&measured)
        .zip(&line_points)
        .enumerate()
        .map(|(i, ((t, (r, _, _)), lp))| {
            let mut details = BTreeMap::new();
            details.insert("peak_ratio".into(), r.s_pp_over_s_mod);
            details.insert("gamma_m_rad_s".into(), r.gamma_m);
            details.insert("gamma_m_sigma_rad_s".into(), r.gamma_m_sigma);
            details.insert("omega_m_rad_s".into(), r.omega_m);
            details.insert("s_pp".into(), r.s_pp);
            details.insert("s_mod".into(), r.s_mod);
            PointRecord {
                index: i,
                setpoint: *t,
                regressor: lp.x,
                observable: lp.y,
                observable_sigma: lp.sigma.unwrap_or(0.0),
                photons: None,
                details,
            }
        })
        .collect();

    let gamma_mean = measured.iter().map(|(r, _, _)| r.gamma_m).sum::<f64>() / measured.len() as f64;
    let gamma_spread = (measured.iter().map(|(r, _, _)| (r.gamma_m - gamma_mean).powi(2)).sum::<f64>()
        / measured.len() as f64)
        .sqrt();

    Ok(CalibrationReport {
        schema: REPORT_SCHEMA.into(),
        pipeline: exp.pipeline,
        inputs_digest: digest,
        setpoint_unit: "K".into(),
        regression: Regression::from_fit(
            "frequency_noise_hz2 vs temperature_k",
            &line,
            "Hz^2/K",
            "Hz^2",
        ),
        x: None,
        gamma_m: Some(AngularQuantity::new(gamma_mean, gamma_spread)),
        g_m0: Some(AngularQuantity::new(g_m0, g_m0_sigma)),
        thermal_slope_hz2_per_k: Some(Quantity {
            value: slope,
            sigma: line.slope_sigma,
        }),
        occupation_offset,
        photon_range: None,
        points: records,
        excluded: vec![],
        notes: vec![
            format!("slope convention: {:?}", g.slope_convention),
            "frequency noise is <dw^2>/(2pi)^2 from the thermal and calibration peak heights".into(),
            "gamma_m is the mean over temperatures, sigma its spread".into(),
        ],
    })
}
