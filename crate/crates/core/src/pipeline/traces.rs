//! Sweep synthesis and trace-directory I/O.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{Experiment, PipelineSettings, SetpointKind};
use super::{PipelineError, Result};
use crate::physics::{
    ac_stark_shift, critical_photon_number, emia_effective_linewidth, photon_number, DriveConfig,
};
use crate::synth::{
    add_noise, emia_s21, emia_window, load_trace, psd_window, qubit_line, qubit_window,
    save_trace, sideband_psd_with_offset, Trace, TraceKind,
};
use crate::units::to_hz;

/// Metadata key holding the position of a trace within its sweep.
pub const SWEEP_INDEX_KEY: &str = "sweep_index";

pub fn expected_trace_kind(exp: &Experiment) -> TraceKind {
    match exp.settings {
        PipelineSettings::Qubit(_) => TraceKind::QubitSpectroscopy,
        PipelineSettings::Emia(_) => TraceKind::TransmissionPower,
        PipelineSettings::Gm0(_) => TraceKind::Psd,
    }
}

/// One trace per setpoint, noise applied per trace from `(seed, index)`.
pub fn synthesize(exp: &Experiment) -> Result<Vec<Trace>> {
    exp.setpoints
        .par_iter()
        .enumerate()
        .map(|(i, &setpoint)| {
            let clean = synthesize_point(exp, setpoint)?;
            let mut t = add_noise(&clean, &exp.noise.for_trace(i as u64))?;
            t.set_meta(SWEEP_INDEX_KEY, i);
            t.set_meta("pipeline", exp.pipeline);
            t.set_meta_f64(exp.setpoint_kind.meta_key(), setpoint);
            Ok(t)
        })
        .collect()
}

fn synthesize_point(exp: &Experiment, setpoint: f64) -> Result<Trace> {
    let sys = &exp.system;
    match &exp.settings {
        PipelineSettings::Qubit(q) => {
            let x = exp.require_x_true()?;
            let kappa = exp.kappa_model.kappa_at_power(setpoint)?;
            let n = photon_number(setpoint, x, q.omega_p, kappa, 0.0)?;
            check_critical(exp, setpoint, n)?;
            let center = q.omega_q0 + ac_stark_shift(n, &sys.transmon, sys.delta_tc)?;
            let axis = qubit_window(to_hz(center), to_hz(q.linewidth), q.window_linewidths, q.points);
            let mut t = qubit_line(center, q.linewidth, &axis)?;
            t.set_meta_f64("kappa_rad_s", kappa);
            t.set_meta_f64("photons", n);
            Ok(t)
        }
        PipelineSettings::Emia(e) => {
            let x = exp.require_x_true()?;
            let kappa = exp.kappa_model.kappa_at_power(setpoint)?;
            let mech = &sys.mechanics;
            let drive = DriveConfig::red_sideband(setpoint, x, sys.resonator.omega_c, mech.omega_m)?;
            let gamma_eff =
                emia_effective_linewidth(setpoint, x, mech, kappa, drive.omega_d, drive.delta_mc)?;
            let axis = emia_window(
                to_hz(drive.omega_d + mech.omega_m),
                to_hz(gamma_eff),
                e.window_linewidths,
                e.points,
            );
            Ok(emia_s21(sys, &drive, kappa, &axis)?)
        }
        PipelineSettings::Gm0(g) => {
            let mech = &sys.mechanics;
            let axis = psd_window(to_hz(mech.omega_m), to_hz(mech.gamma_m), g.window_linewidths, g.points);
            Ok(sideband_psd_with_offset(
                sys,
                setpoint,
                g.occupation_offset,
                &g.modulation(),
                g.enbw,
                &axis,
            )?)
        }
    }
}

/// Rejects drive levels outside the dispersive regime.
pub(crate) fn check_critical(exp: &Experiment, p_app: f64, photons: f64) -> Result<()> {
    let n_crit = critical_photon_number(exp.system.transmon.g_tc, exp.system.delta_tc)?;
    if photons >= n_crit {
        return Err(PipelineError::AboveCritical {
            p_app,
            photons,
            n_crit,
        });
    }
    Ok(())
}

/// Setpoint of each trace: from its metadata, else from the configured sweep.
pub fn trace_setpoints(exp: &Experiment, traces: &[Trace]) -> Result<Vec<f64>> {
    let key = exp.setpoint_kind.meta_key();
    traces
        .iter()
        .enumerate()
        .map(|(i, t)| match t.meta_f64(key) {
            Some(v) => Ok(v),
            None if traces.len() == exp.setpoints.len() => Ok(exp.setpoints[i]),
            None => Err(PipelineError::Config(format!(
                "trace {i} has no {key} metadata and the sweep has {} setpoints for {} traces",
                exp.setpoints.len(),
                traces.len()
            ))),
        })
        .collect::<Result<Vec<_>>>()
        .and_then(|v| {
            let bad = match exp.setpoint_kind {
                SetpointKind::Power => v.iter().find(|p| !(p.is_finite() && **p >= 0.0)),
                SetpointKind::Temperature => v.iter().find(|t| !(t.is_finite() && **t > 0.0)),
            };
            match bad {
                Some(b) => Err(PipelineError::Config(format!("invalid {key} = {b}"))),
                None => Ok(v),
            }
        })
}

pub fn trace_file_name(index: usize) -> String {
    format!("trace_{index:03}.csv")
}

/// Writes `trace_000.csv`, `trace_001.csv`, … into `dir`, creating it if needed.
pub fn write_trace_dir(dir: impl AsRef<Path>, traces: &[Trace]) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)
        .map_err(|e| PipelineError::Io(format!("creating {}: {e}", dir.display())))?;
    traces
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let path = dir.join(trace_file_name(i));
            save_trace(&path, t)?;
            Ok(path)
        })
        .collect()
}

/// Loads every `trace_*.csv` in `dir` in file-name order.
pub fn read_trace_dir(dir: impl AsRef<Path>) -> Result<Vec<Trace>> {
    let dir = dir.as_ref();
    let entries = std::fs::read_dir(dir)
        .map_err(|e| PipelineError::Io(format!("reading {}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("trace_") && n.ends_with(".csv"))
        })
        .collect();
    if paths.is_empty() {
        return Err(PipelineError::Io(format!("no trace_*.csv files in {}", dir.display())));
    }
    paths.sort();
    paths.iter().map(|p| Ok(load_trace(p)?)).collect()
}
