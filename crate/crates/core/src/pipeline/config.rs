//! Experiment configuration.
//!
//! The on-disk form ([`ExperimentConfig`]) uses ordinary-frequency values with
//! the unit in the key name (`omega_c_ghz` is ω_c/2π in GHz, `p_app_nw` is the
//! applied power in nW). [`ExperimentConfig::resolve`] validates it and
//! converts everything to SI with angular rates.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{PipelineError, PipelineKind, Result};
use crate::physics::{
    MechanicsParams, ResonatorParams, SlopeConvention, SystemParams, TransmonParams,
};
use crate::synth::{KappaModel, Modulation, NoiseSpec};
use crate::units::{hz, MILLI, NANO};

const GHZ: f64 = 1e9;
const MHZ: f64 = 1e6;
const KHZ: f64 = 1e3;
const PICOGRAM: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub pipeline: PipelineKind,
    /// Injected calibration factor, used only when synthesizing traces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_true_per_s: Option<f64>,
    pub system: SystemSection,
    #[serde(default)]
    pub uncertainties: UncertaintySection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_model: Option<KappaSection>,
    pub sweep: SweepSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubit: Option<QubitSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emia: Option<EmiaSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gm0: Option<Gm0Section>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub omega_c_ghz: f64,
    pub kappa_mhz: f64,
    pub omega_q_max_ghz: f64,
    /// Signed, negative for a transmon.
    pub alpha_mhz: f64,
    pub g_tc_mhz: f64,
    /// Transmon–resonator detuning at the working point.
    pub delta_tc_ghz: f64,
    pub omega_m_mhz: f64,
    pub gamma_m_hz: f64,
    pub g_m0_hz: f64,
    pub mass_pg: f64,
}

/// 1σ uncertainties of the device parameters, propagated into `x`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UncertaintySection {
    #[serde(default)]
    pub g_tc_mhz: f64,
    #[serde(default)]
    pub alpha_mhz: f64,
    #[serde(default)]
    pub kappa_mhz: f64,
    #[serde(default)]
    pub g_m0_hz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum KappaSection {
    Linear {
        offset_mhz: f64,
        slope_khz_per_nw: f64,
    },
    Tabulated {
        table: Vec<KappaRow>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KappaRow {
    pub p_app_mw: f64,
    pub kappa_mhz: f64,
}

/// Exactly one of the keys must be present.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_app_nw: Option<SweepValues>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_app_mw: Option<SweepValues>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_k: Option<SweepValues>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValues {
    List(Vec<f64>),
    Range(SweepRange),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

impl SweepValues {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            SweepValues::List(v) => Ok(v.clone()),
            SweepValues::Range(r) => {
                if r.points == 0 {
                    return Err(PipelineError::Config("sweep range needs at least one point".into()));
                }
                if r.points == 1 {
                    return Ok(vec![r.start]);
                }
                let steps = (r.points - 1) as f64;
                let v = (0..r.points)
                    .map(|i| {
                        let t = i as f64 / steps;
                        match (i, r.spacing) {
                            (0, _) => r.start,
                            (i, _) if i == r.points - 1 => r.stop,
                            (_, Spacing::Linear) => r.start + (r.stop - r.start) * t,
                            (_, Spacing::Log) => r.start * (r.stop / r.start).powf(t),
                        }
                    })
                    .collect();
                if r.spacing == Spacing::Log && !(r.start > 0.0 && r.stop > 0.0) {
                    return Err(PipelineError::Config("log-spaced sweep needs positive endpoints".into()));
                }
                Ok(v)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(default)]
    pub relative_amplitude: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitSection {
    /// Probe tone, on resonance with the resonator at the working point.
    pub omega_p_ghz: f64,
    /// Zero-power qubit line position. Defaults to the sweet-spot frequency.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_q0_ghz: Option<f64>,
    #[serde(default = "default_qubit_linewidth")]
    pub linewidth_mhz: f64,
    #[serde(default = "default_qubit_window")]
    pub window_linewidths: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmiaSection {
    #[serde(default = "default_emia_window")]
    pub window_linewidths: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    /// Points with a fitted dip wider than this fraction of κ are excluded.
    #[serde(default = "default_max_fraction")]
    pub max_linewidth_fraction_of_kappa: f64,
}

impl Default for EmiaSection {
    fn default() -> Self {
        Self {
            window_linewidths: default_emia_window(),
            points: default_points(),
            max_linewidth_fraction_of_kappa: default_max_fraction(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gm0Section {
    pub omega_mod_mhz: f64,
    /// Frequency deviation of the calibration tone, Ω_φ/2π.
    pub modulation_depth_hz: f64,
    #[serde(default = "default_enbw")]
    pub enbw_hz: f64,
    #[serde(default = "default_psd_window")]
    pub window_linewidths: f64,
    #[serde(default = "default_psd_points")]
    pub points: usize,
    /// Extra mechanical occupation added at synthesis (back-action heating).
    #[serde(default)]
    pub occupation_offset: f64,
    #[serde(default)]
    pub slope_convention: SlopeConventionName,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeConventionName {
    #[default]
    Corrected,
    Literal,
}

impl From<SlopeConventionName> for SlopeConvention {
    fn from(c: SlopeConventionName) -> Self {
        match c {
            SlopeConventionName::Corrected => SlopeConvention::Corrected,
            SlopeConventionName::Literal => SlopeConvention::Literal,
        }
    }
}

fn default_qubit_linewidth() -> f64 {
    2.0
}
fn default_qubit_window() -> f64 {
    10.0
}
fn default_emia_window() -> f64 {
    40.0
}
fn default_points() -> usize {
    801
}
fn default_max_fraction() -> f64 {
    0.1
}
fn default_enbw() -> f64 {
    1.0
}
fn default_psd_window() -> f64 {
    30.0
}
fn default_psd_points() -> usize {
    1601
}

/// What a sweep steps through.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetpointKind {
    /// Applied power, W.
    Power,
    /// Cryostat temperature, K.
    Temperature,
}

impl SetpointKind {
    pub fn meta_key(&self) -> &'static str {
        match self {
            SetpointKind::Power => "p_app_w",
            SetpointKind::Temperature => "temperature_k",
        }
    }
}

/// Qubit-pipeline settings in SI.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QubitSettings {
    pub omega_p: f64,
    pub omega_q0: f64,
    pub linewidth: f64,
    pub window_linewidths: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmiaSettings {
    pub window_linewidths: f64,
    pub points: usize,
    pub max_linewidth_fraction_of_kappa: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Gm0Settings {
    pub phi0: f64,
    pub omega_mod: f64,
    pub enbw: f64,
    pub window_linewidths: f64,
    pub points: usize,
    pub occupation_offset: f64,
    #[serde(skip)]
    pub convention: SlopeConvention,
    pub slope_convention: SlopeConventionName,
}

impl Gm0Settings {
    pub fn modulation(&self) -> Modulation {
        Modulation {
            phi0: self.phi0,
            omega_mod: self.omega_mod,
        }
    }
}

/// Parameter uncertainties in SI, angular.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Uncertainties {
    pub g_tc: f64,
    pub alpha: f64,
    pub kappa: f64,
    pub g_m0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum PipelineSettings {
    Qubit(QubitSettings),
    Emia(EmiaSettings),
    Gm0(Gm0Settings),
}

/// A validated experiment in SI units with angular rates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Experiment {
    pub pipeline: PipelineKind,
    pub x_true: Option<f64>,
    pub system: SystemParams,
    pub uncertainties: Uncertainties,
    pub kappa_model: KappaModel,
    pub setpoint_kind: SetpointKind,
    pub setpoints: Vec<f64>,
    pub noise: NoiseSpec,
    pub settings: PipelineSettings,
}

impl Experiment {
    pub fn qubit(&self) -> Option<&QubitSettings> {
        match &self.settings {
            PipelineSettings::Qubit(s) => Some(s),
            _ => None,
        }
    }

    pub fn emia(&self) -> Option<&EmiaSettings> {
        match &self.settings {
            PipelineSettings::Emia(s) => Some(s),
            _ => None,
        }
    }

    pub fn gm0(&self) -> Option<&Gm0Settings> {
        match &self.settings {
            PipelineSettings::Gm0(s) => Some(s),
            _ => None,
        }
    }

    /// Injected `x`, required for synthesis.
    pub fn require_x_true(&self) -> Result<f64> {
        self.x_true.ok_or_else(|| {
            PipelineError::Config("x_true_per_s is required to synthesize traces".into())
        })
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(PipelineError::Config(format!("{name} = {v} must be finite and > 0")))
    }
}

fn nonnegative(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(PipelineError::Config(format!("{name} = {v} must be finite and >= 0")))
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("reading {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn resolve(&self) -> Result<Experiment> {
        let s = &self.system;
        let system = SystemParams {
            resonator: ResonatorParams::new(hz(s.omega_c_ghz * GHZ), hz(s.kappa_mhz * MHZ))?,
            transmon: TransmonParams::new(
                hz(s.omega_q_max_ghz * GHZ),
                hz(s.alpha_mhz * MHZ),
                hz(s.g_tc_mhz * MHZ),
            )?,
            mechanics: MechanicsParams::new(
                hz(s.omega_m_mhz * MHZ),
                hz(s.gamma_m_hz),
                hz(s.g_m0_hz),
                s.mass_pg * PICOGRAM,
            )?,
            delta_tc: hz(s.delta_tc_ghz * GHZ),
        };
        if !(system.delta_tc.is_finite() && system.delta_tc != 0.0) {
            return Err(PipelineError::Config("delta_tc_ghz must be finite and nonzero".into()));
        }

        let u = &self.uncertainties;
        let uncertainties = Uncertainties {
            g_tc: hz(nonnegative("uncertainties.g_tc_mhz", u.g_tc_mhz)? * MHZ),
            alpha: hz(nonnegative("uncertainties.alpha_mhz", u.alpha_mhz)? * MHZ),
            kappa: hz(nonnegative("uncertainties.kappa_mhz", u.kappa_mhz)? * MHZ),
            g_m0: hz(nonnegative("uncertainties.g_m0_hz", u.g_m0_hz)?),
        };

        let kappa_model = match &self.kappa_model {
            None => KappaModel::linear(system.resonator.kappa, 0.0)?,
            Some(KappaSection::Linear {
                offset_mhz,
                slope_khz_per_nw,
            }) => KappaModel::linear(hz(offset_mhz * MHZ), hz(slope_khz_per_nw * KHZ) / NANO)?,
            Some(KappaSection::Tabulated { table }) => KappaModel::tabulated(
                table
                    .iter()
                    .map(|r| (r.p_app_mw * MILLI, hz(r.kappa_mhz * MHZ)))
                    .collect(),
            )?,
        };

        let (setpoint_kind, setpoints) = self.resolve_sweep()?;

        let noise = NoiseSpec::new(
            nonnegative("noise.relative_amplitude", self.noise.relative_amplitude)?,
            self.noise.seed,
        );
        let x_true = self.x_true_per_s.map(|x| positive("x_true_per_s", x)).transpose()?;

        let settings = match self.pipeline {
            PipelineKind::QubitStark => {
                let q = self.qubit.as_ref().ok_or_else(|| {
                    PipelineError::Config("pipeline qubit_stark needs a [qubit] section".into())
                })?;
                PipelineSettings::Qubit(QubitSettings {
                    omega_p: hz(positive("qubit.omega_p_ghz", q.omega_p_ghz)? * GHZ),
                    omega_q0: match q.omega_q0_ghz {
                        Some(f) => hz(positive("qubit.omega_q0_ghz", f)? * GHZ),
                        None => system.transmon.omega_q_max,
                    },
                    linewidth: hz(positive("qubit.linewidth_mhz", q.linewidth_mhz)? * MHZ),
                    window_linewidths: positive("qubit.window_linewidths", q.window_linewidths)?,
                    points: q.points,
                })
            }
            PipelineKind::Emia => {
                let e = self.emia.clone().unwrap_or_default();
                PipelineSettings::Emia(EmiaSettings {
                    window_linewidths: positive("emia.window_linewidths", e.window_linewidths)?,
                    points: e.points,
                    max_linewidth_fraction_of_kappa: positive(
                        "emia.max_linewidth_fraction_of_kappa",
                        e.max_linewidth_fraction_of_kappa,
                    )?,
                })
            }
            PipelineKind::Gm0Thermal => {
                let g = self.gm0.as_ref().ok_or_else(|| {
                    PipelineError::Config("pipeline gm0_thermal needs a [gm0] section".into())
                })?;
                let omega_mod = hz(positive("gm0.omega_mod_mhz", g.omega_mod_mhz)? * MHZ);
                let depth = hz(positive("gm0.modulation_depth_hz", g.modulation_depth_hz)?);
                PipelineSettings::Gm0(Gm0Settings {
                    phi0: depth / omega_mod,
                    omega_mod,
                    enbw: positive("gm0.enbw_hz", g.enbw_hz)?,
                    window_linewidths: positive("gm0.window_linewidths", g.window_linewidths)?,
                    points: g.points,
                    occupation_offset: nonnegative("gm0.occupation_offset", g.occupation_offset)?,
                    convention: g.slope_convention.into(),
                    slope_convention: g.slope_convention,
                })
            }
        };
        let points = match &settings {
            PipelineSettings::Qubit(q) => q.points,
            PipelineSettings::Emia(e) => e.points,
            PipelineSettings::Gm0(g) => g.points,
        };
        if points < crate::synth::MIN_TRACE_POINTS {
            return Err(PipelineError::Config(format!(
                "{points} points per trace, need at least {}",
                crate::synth::MIN_TRACE_POINTS
            )));
        }

        Ok(Experiment {
            pipeline: self.pipeline,
            x_true,
            system,
            uncertainties,
            kappa_model,
            setpoint_kind,
            setpoints,
            noise,
            settings,
        })
    }

    fn resolve_sweep(&self) -> Result<(SetpointKind, Vec<f64>)> {
        let sw = &self.sweep;
        let given: Vec<(&str, &SweepValues, SetpointKind, f64)> = [
            (&sw.p_app_nw, "p_app_nw", SetpointKind::Power, NANO),
            (&sw.p_app_mw, "p_app_mw", SetpointKind::Power, MILLI),
            (&sw.temperature_k, "temperature_k", SetpointKind::Temperature, 1.0),
        ]
        .into_iter()
        .filter_map(|(v, name, kind, scale)| v.as_ref().map(|v| (name, v, kind, scale)))
        .collect();
        let (name, values, kind, scale) = match given.as_slice() {
            [one] => *one,
            [] => return Err(PipelineError::Config("sweep needs one of p_app_nw, p_app_mw, temperature_k".into())),
            _ => return Err(PipelineError::Config("sweep must give exactly one setpoint list".into())),
        };
        let expected = match self.pipeline {
            PipelineKind::QubitStark | PipelineKind::Emia => SetpointKind::Power,
            PipelineKind::Gm0Thermal => SetpointKind::Temperature,
        };
        if kind != expected {
            return Err(PipelineError::Config(format!(
                "pipeline {} cannot sweep {name}",
                self.pipeline
            )));
        }
        let values = values.values()?;
        if values.is_empty() {
            return Err(PipelineError::Config("sweep is empty".into()));
        }
        for v in &values {
            match kind {
                SetpointKind::Power => nonnegative(&format!("sweep.{name}"), *v)?,
                SetpointKind::Temperature => positive(&format!("sweep.{name}"), *v)?,
            };
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(PipelineError::Config(format!("sweep.{name} must be nondecreasing")));
        }
        Ok((kind, values.into_iter().map(|v| v * scale).collect()))
    }
}
