//! Calibration reports and the cross-method consistency check.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::Experiment;
use super::{PipelineError, PipelineKind, Result};
use crate::fit::LineFitResult;
use crate::synth::Trace;
use crate::units::to_hz;

pub const REPORT_SCHEMA: &str = "emcal-report/1";
pub const DEFAULT_CONSISTENCY_THRESHOLD: f64 = 0.05;

/// Value with 1σ uncertainty in SI units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub sigma: f64,
}

/// Angular rate with its ordinary-frequency view.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularQuantity {
    pub rad_s: f64,
    pub sigma_rad_s: f64,
    pub hz: f64,
    pub sigma_hz: f64,
}

impl AngularQuantity {
    pub fn new(rad_s: f64, sigma_rad_s: f64) -> Self {
        Self {
            rad_s,
            sigma_rad_s,
            hz: to_hz(rad_s),
            sigma_hz: to_hz(sigma_rad_s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    /// What was regressed, e.g. `"stark_shift_times_kappa_squared vs p_app_w"`.
    pub model: String,
    pub slope: f64,
    pub slope_sigma: f64,
    pub slope_unit: String,
    pub intercept: f64,
    pub intercept_sigma: f64,
    pub intercept_unit: String,
    pub covariance: f64,
    pub chi2_reduced: f64,
    pub n_points: usize,
}

impl Regression {
    pub fn from_fit(model: &str, fit: &LineFitResult, slope_unit: &str, intercept_unit: &str) -> Self {
        Self {
            model: model.into(),
            slope: fit.slope,
            slope_sigma: fit.slope_sigma,
            slope_unit: slope_unit.into(),
            intercept: fit.intercept,
            intercept_sigma: fit.intercept_sigma,
            intercept_unit: intercept_unit.into(),
            covariance: fit.covariance,
            chi2_reduced: fit.chi2_reduced,
            n_points: fit.n_points,
        }
    }
}

/// Recovered calibration factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XEstimate {
    pub value_per_s: f64,
    /// From the regression slope alone.
    pub sigma_stat_per_s: f64,
    /// Statistical and parameter contributions in quadrature.
    pub sigma_per_s: f64,
    /// Contribution of each declared parameter uncertainty.
    pub sigma_components_per_s: BTreeMap<String, f64>,
}

impl XEstimate {
    pub fn new(value: f64, sigma_stat: f64, components: BTreeMap<String, f64>) -> Self {
        let total = components
            .values()
            .fold(sigma_stat * sigma_stat, |acc, c| acc + c * c)
            .sqrt();
        Self {
            value_per_s: value,
            sigma_stat_per_s: sigma_stat,
            sigma_per_s: total,
            sigma_components_per_s: components,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonRange {
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub index: usize,
    /// Applied power in W or temperature in K.
    pub setpoint: f64,
    pub regressor: f64,
    pub observable: f64,
    pub observable_sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub photons: Option<f64>,
    /// Pipeline-specific diagnostics, SI unless the key says otherwise.
    pub details: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcludedPoint {
    pub index: usize,
    pub setpoint: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub schema: String,
    pub pipeline: PipelineKind,
    /// SHA-256 over the resolved configuration and the trace data.
    pub inputs_digest: String,
    pub setpoint_unit: String,
    pub regression: Regression,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<XEstimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_m: Option<AngularQuantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_m0: Option<AngularQuantity>,
    /// Thermal slope of ⟨δω²⟩/(2π)², Hz²/K.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thermal_slope_hz2_per_k: Option<Quantity>,
    /// Mechanical occupation not explained by the cryostat temperature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occupation_offset: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub photon_range: Option<PhotonRange>,
    pub points: Vec<PointRecord>,
    pub excluded: Vec<ExcludedPoint>,
    pub notes: Vec<String>,
}

impl CalibrationReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| PipelineError::Io(format!("serializing report: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(s)
            .map_err(|e| PipelineError::Config(format!("parsing report: {e}")))?;
        if r.schema != REPORT_SCHEMA {
            return Err(PipelineError::Config(format!(
                "report schema {:?}, expected {REPORT_SCHEMA:?}",
                r.schema
            )));
        }
        Ok(r)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?)
            .map_err(|e| PipelineError::Io(format!("writing {}: {e}", path.display())))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("reading {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// Digest of everything a report depends on.
pub fn inputs_digest(exp: &Experiment, traces: &[Trace]) -> Result<String> {
    let mut h = Sha256::new();
    let cfg = serde_json::to_vec(exp)
        .map_err(|e| PipelineError::Io(format!("serializing configuration: {e}")))?;
    h.update((cfg.len() as u64).to_le_bytes());
    h.update(&cfg);
    for t in traces {
        h.update(t.kind().as_str().as_bytes());
        h.update((t.meta().len() as u64).to_le_bytes());
        for (k, v) in t.meta() {
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        h.update((t.len() as u64).to_le_bytes());
        for (f, v) in t.freq_hz().iter().zip(t.values()) {
            h.update(f.to_le_bytes());
            h.update(v.to_le_bytes());
        }
    }
    Ok(hex::encode(h.finalize()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyVerdict {
    pub pipeline_a: PipelineKind,
    pub pipeline_b: PipelineKind,
    pub x_a_per_s: f64,
    pub x_b_per_s: f64,
    /// `2|x_a − x_b| / (x_a + x_b)`.
    pub relative_difference: f64,
    /// First-order 1σ of the relative difference from the reports' total sigmas.
    pub relative_difference_sigma: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Largest photon-number endpoint over the smallest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub photon_span: Option<f64>,
}

pub fn cross_consistency(
    a: &CalibrationReport,
    b: &CalibrationReport,
    threshold: f64,
) -> Result<ConsistencyVerdict> {
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(PipelineError::Config(format!("threshold {threshold} must be >= 0")));
    }
    let xa = a.x.as_ref().ok_or_else(|| {
        PipelineError::Config(format!("report of pipeline {} carries no x", a.pipeline))
    })?;
    let xb = b.x.as_ref().ok_or_else(|| {
        PipelineError::Config(format!("report of pipeline {} carries no x", b.pipeline))
    })?;
    let (va, vb) = (xa.value_per_s, xb.value_per_s);
    if !(va > 0.0 && vb > 0.0) {
        return Err(PipelineError::Config(format!("x values {va}, {vb} must be > 0")));
    }
    let sum = va + vb;
    let relative_difference = 2.0 * (va - vb).abs() / sum;
    // d/dva of 2|va−vb|/(va+vb) = ±4vb/sum², d/dvb = ∓4va/sum²
    let relative_difference_sigma =
        4.0 * ((vb * xa.sigma_per_s).powi(2) + (va * xb.sigma_per_s).powi(2)).sqrt() / (sum * sum);
    let photon_span = match (a.photon_range, b.photon_range) {
        (Some(ra), Some(rb)) => {
            let lo = ra.min.min(rb.min);
            (lo > 0.0).then(|| ra.max.max(rb.max) / lo)
        }
        _ => None,
    };
    Ok(ConsistencyVerdict {
        pipeline_a: a.pipeline,
        pipeline_b: b.pipeline,
        x_a_per_s: va,
        x_b_per_s: vb,
        relative_difference,
        relative_difference_sigma,
        threshold,
        pass: relative_difference <= threshold,
        photon_span,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(kind: PipelineKind, x: Option<f64>, range: Option<(f64, f64)>) -> CalibrationReport {
        CalibrationReport {
            schema: REPORT_SCHEMA.into(),
            pipeline: kind,
            inputs_digest: String::new(),
            setpoint_unit: "W".into(),
            regression: Regression {
                model: String::new(),
                slope: 0.0,
                slope_sigma: 0.0,
                slope_unit: String::new(),
                intercept: 0.0,
                intercept_sigma: 0.0,
                intercept_unit: String::new(),
                covariance: 0.0,
                chi2_reduced: 0.0,
                n_points: 0,
            },
            x: x.map(|v| XEstimate::new(v, 0.1, BTreeMap::new())),
            gamma_m: None,
            g_m0: None,
            thermal_slope_hz2_per_k: None,
            occupation_offset: None,
            photon_range: range.map(|(min, max)| PhotonRange { min, max }),
            points: vec![],
            excluded: vec![],
            notes: vec![],
        }
    }

    #[test]
    fn reported_x_values_agree_within_five_percent() {
        let a = report(PipelineKind::QubitStark, Some(5.65), Some((0.7, 28.0)));
        let b = report(PipelineKind::Emia, Some(5.41), Some((1.4e6, 1.4e8)));
        let v = cross_consistency(&a, &b, DEFAULT_CONSISTENCY_THRESHOLD).unwrap();
        assert!((v.relative_difference - 0.0434).abs() < 1e-4);
        assert!(v.pass);
        assert!((v.photon_span.unwrap() - 2e8).abs() < 1.0);
        assert!(!cross_consistency(&a, &b, 0.04).unwrap().pass);
    }

    #[test]
    fn equal_x_gives_zero() {
        let a = report(PipelineKind::QubitStark, Some(5.5), None);
        let v = cross_consistency(&a, &a, 0.05).unwrap();
        assert_eq!(v.relative_difference, 0.0);
        assert!(v.pass);
        assert!(v.photon_span.is_none());
    }

    #[test]
    fn missing_x_is_an_error() {
        let a = report(PipelineKind::QubitStark, Some(5.5), None);
        let g = report(PipelineKind::Gm0Thermal, None, None);
        assert!(cross_consistency(&a, &g, 0.05).is_err());
    }

    #[test]
    fn json_round_trip_and_schema_check() {
        let a = report(PipelineKind::Emia, Some(5.41), Some((1.4e6, 1.4e8)));
        let s = a.to_json().unwrap();
        assert_eq!(CalibrationReport::from_json(&s).unwrap(), a);
        let bad = s.replace(REPORT_SCHEMA, "emcal-report/0");
        assert!(CalibrationReport::from_json(&bad).is_err());
    }
}
