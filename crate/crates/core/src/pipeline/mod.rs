//! The three calibration pipelines, their configuration and reports.
//!
//! Every pipeline works on traces: [`synthesize`] produces them from an
//! [`Experiment`], [`calibrate`] analyzes them, whether they come from the
//! synthesizer or from CSV files.

mod config;
mod defaults;
mod emia;
mod gm0;
mod plot;
mod qubit;
mod report;
mod selftest;
mod traces;

pub use config::{
    EmiaSection, EmiaSettings, Experiment, ExperimentConfig, Gm0Section, Gm0Settings, KappaRow,
    KappaSection, NoiseSection, PipelineSettings, QubitSection, QubitSettings, SetpointKind,
    SlopeConventionName, Spacing, SweepRange, SweepSection, SweepValues, SystemSection,
    UncertaintySection, Uncertainties,
};
pub use defaults::{
    reference_config, EMIA_KAPPA_TABLE_MW_MHZ, GM0_TEMPERATURES_K, REFERENCE_G_M0_HZ, REFERENCE_STARK_SLOPE,
    REFERENCE_THERMAL_SLOPE, REFERENCE_X_EMIA, REFERENCE_X_QB,
};
pub use gm0::MIN_TEMPERATURES;
pub use plot::write_plots;
pub use report::{
    cross_consistency, inputs_digest, AngularQuantity, CalibrationReport, ConsistencyVerdict,
    ExcludedPoint, PhotonRange, PointRecord, Quantity, Regression, XEstimate,
    DEFAULT_CONSISTENCY_THRESHOLD, REPORT_SCHEMA,
};
pub use selftest::{selftest, SelftestCheck, SelftestOutcome};
pub use traces::{
    expected_trace_kind, read_trace_dir, synthesize, trace_file_name, trace_setpoints,
    write_trace_dir, SWEEP_INDEX_KEY,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fit::{FitError, LinePoint};
use crate::physics::PhysicsError;
use crate::synth::{SynthError, Trace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineKind {
    QubitStark,
    Emia,
    Gm0Thermal,
}

impl PipelineKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PipelineKind::QubitStark => "qubit_stark",
            PipelineKind::Emia => "emia",
            PipelineKind::Gm0Thermal => "gm0_thermal",
        }
    }
}

impl fmt::Display for PipelineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PipelineKind {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qubit_stark" | "qubit" => Ok(PipelineKind::QubitStark),
            "emia" => Ok(PipelineKind::Emia),
            "gm0_thermal" | "gm0" => Ok(PipelineKind::Gm0Thermal),
            other => Err(PipelineError::Config(format!("unknown pipeline {other:?}"))),
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("setpoint {p_app:e} W gives {photons:.3} photons, not below the critical photon number {n_crit:.3}")]
    AboveCritical { p_app: f64, photons: f64, n_crit: f64 },
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error("i/o error: {0}")]
    Io(String),
}

impl PipelineError {
    /// True when the inputs were valid but an estimator failed.
    pub fn is_fit_failure(&self) -> bool {
        matches!(self, PipelineError::Fit(_))
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;

/// Analyzes `traces` (one per sweep point) with the experiment's pipeline.
pub fn calibrate(exp: &Experiment, traces: &[Trace]) -> Result<CalibrationReport> {
    if traces.is_empty() {
        return Err(PipelineError::Config("no traces to calibrate".into()));
    }
    let kind = expected_trace_kind(exp);
    if let Some((i, t)) = traces.iter().enumerate().find(|(_, t)| t.kind() != kind) {
        return Err(PipelineError::Config(format!(
            "trace {i} is {}, pipeline {} needs {kind}",
            t.kind(),
            exp.pipeline
        )));
    }
    let digest = inputs_digest(exp, traces)?;
    match &exp.settings {
        PipelineSettings::Qubit(q) => qubit::calibrate(exp, q, traces, digest),
        PipelineSettings::Emia(e) => emia::calibrate(exp, e, traces, digest),
        PipelineSettings::Gm0(g) => gm0::calibrate(exp, g, traces, digest),
    }
}

/// Synthesizes the sweep and calibrates it.
pub fn run(exp: &Experiment) -> Result<CalibrationReport> {
    calibrate(exp, &synthesize(exp)?)
}

/// Smallest per-point sigma, relative to the largest |y| of the regression.
pub const SIGMA_FLOOR: f64 = 1e-9;

/// Weighted points from `(x, y, σ)` with σ floored at `SIGMA_FLOOR·max|y|`,
/// so noiseless data keep finite weights.
pub(crate) fn floored_points(raw: &[(f64, f64, f64)]) -> Vec<LinePoint> {
    let scale = raw.iter().map(|r| r.1.abs()).fold(0.0, f64::max);
    let floor = SIGMA_FLOOR * scale;
    raw.iter()
        .map(|&(x, y, s)| LinePoint::new(x, y, if s.is_finite() { s.max(floor) } else { s }))
        .collect()
}

/// `|f(+1) − f(−1)| / 2`: first-order effect of a 1σ parameter shift.
pub(crate) fn half_difference(f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    Ok(0.5 * (f(1.0)? - f(-1.0)?).abs())
}
