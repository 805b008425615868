//! Deterministic synthesis of instrument traces.
//!
//! A [`Trace`] is a swept-frequency record: VNA power transmission, two-tone
//! qubit spectroscopy, or a sideband noise power spectral density. Frequency
//! axes are always ordinary frequency in Hz.

mod csv;
mod kappa;
mod lineshape;
mod noise;

pub use self::csv::{load_trace, read_trace, save_trace, write_trace, TRACE_HEADER};
pub use kappa::KappaModel;
pub use lineshape::{
    emia_s21, emia_window, linspace, lorentzian_s21, psd_window, qubit_line, qubit_window,
    sideband_psd, sideband_psd_with_offset, Modulation,
};
pub use noise::{add_noise, derive_seed, NoiseSpec};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::physics::PhysicsError;

/// Smallest accepted trace length.
pub const MIN_TRACE_POINTS: usize = 8;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error("invalid trace: {0}")]
    InvalidTrace(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("trace parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SynthError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    /// |S21|² normalized to the bare resonance peak.
    TransmissionPower,
    /// Two-tone spectroscopy response versus spectroscopy-tone frequency,
    /// normalized to a unit peak.
    QubitSpectroscopy,
    /// Frequency-noise power spectral density, (rad/s)²/Hz.
    Psd,
}

impl TraceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TraceKind::TransmissionPower => "transmission_power",
            TraceKind::QubitSpectroscopy => "qubit_spectroscopy",
            TraceKind::Psd => "psd",
        }
    }
}

impl fmt::Display for TraceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TraceKind {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "transmission_power" => Ok(TraceKind::TransmissionPower),
            "qubit_spectroscopy" => Ok(TraceKind::QubitSpectroscopy),
            "psd" => Ok(TraceKind::Psd),
            other => Err(SynthError::InvalidTrace(format!("unknown trace kind {other:?}"))),
        }
    }
}

/// A swept-frequency record with free-form metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    kind: TraceKind,
    freq_hz: Vec<f64>,
    values: Vec<f64>,
    meta: BTreeMap<String, String>,
}

impl Trace {
    /// Builds a trace, checking the axis is strictly increasing, lengths
    /// match, everything is finite and power-like values are nonnegative.
    pub fn new(kind: TraceKind, freq_hz: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if freq_hz.len() != values.len() {
            return Err(SynthError::InvalidTrace(format!(
                "axis has {} points but values has {}",
                freq_hz.len(),
                values.len()
            )));
        }
        if freq_hz.len() < MIN_TRACE_POINTS {
            return Err(SynthError::InvalidTrace(format!(
                "{} points, need at least {MIN_TRACE_POINTS}",
                freq_hz.len()
            )));
        }
        if let Some(i) = freq_hz.iter().position(|f| !f.is_finite()) {
            return Err(SynthError::InvalidTrace(format!("non-finite frequency at index {i}")));
        }
        if let Some(i) = freq_hz.windows(2).position(|w| w[1] <= w[0]) {
            return Err(SynthError::InvalidTrace(format!(
                "frequency axis not strictly increasing at index {}",
                i + 1
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SynthError::InvalidTrace(format!("non-finite value at index {i}")));
        }
        if let Some(i) = values.iter().position(|v| *v < 0.0) {
            return Err(SynthError::InvalidTrace(format!(
                "negative {kind} value at index {i}"
            )));
        }
        Ok(Self {
            kind,
            freq_hz,
            values,
            meta: BTreeMap::new(),
        })
    }

    pub fn kind(&self) -> TraceKind {
        self.kind
    }

    pub fn freq_hz(&self) -> &[f64] {
        &self.freq_hz
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn meta(&self) -> &BTreeMap<String, String> {
        &self.meta
    }

    pub fn meta_f64(&self, key: &str) -> Option<f64> {
        self.meta.get(key).and_then(|v| v.parse().ok())
    }

    /// Adds or replaces a metadata entry. Keys must not contain `=` or newlines.
    pub fn set_meta(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        let key = key.into();
        debug_assert!(!key.contains('=') && !key.contains('\n'));
        self.meta.insert(key, value.to_string().replace('\n', " "));
    }

    /// Records a float in full round-trip precision.
    pub fn set_meta_f64(&mut self, key: impl Into<String>, value: f64) {
        self.set_meta(key, format!("{value:e}"));
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl fmt::Display) -> Self {
        self.set_meta(key, value);
        self
    }

    /// Same axis and metadata, new values.
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        let mut t = Trace::new(self.kind, self.freq_hz.clone(), values)?;
        t.meta = self.meta.clone();
        Ok(t)
    }

    /// Points whose index is not in `skip`.
    pub fn without_indices(&self, skip: std::ops::RangeInclusive<usize>) -> Result<Self> {
        let (freq, values): (Vec<f64>, Vec<f64>) = self
            .freq_hz
            .iter()
            .zip(&self.values)
            .enumerate()
            .filter(|(i, _)| !skip.contains(i))
            .map(|(_, (f, v))| (*f, *v))
            .unzip();
        let mut t = Trace::new(self.kind, freq, values)?;
        t.meta = self.meta.clone();
        Ok(t)
    }

    /// Index of the axis point closest to `f_hz`.
    pub fn nearest_index(&self, f_hz: f64) -> usize {
        nearest_index(&self.freq_hz, f_hz)
    }

    pub fn covers(&self, f_hz: f64) -> bool {
        f_hz >= self.freq_hz[0] && f_hz <= self.freq_hz[self.freq_hz.len() - 1]
    }
}

/// Index of the point of the increasing, nonempty `axis` closest to `f_hz`.
pub(crate) fn nearest_index(axis: &[f64], f_hz: f64) -> usize {
    let i = axis.partition_point(|f| *f < f_hz);
    if i == 0 {
        0
    } else if i == axis.len() {
        i - 1
    } else if (axis[i] - f_hz) < (f_hz - axis[i - 1]) {
        i
    } else {
        i - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64).collect()
    }

    #[test]
    fn trace_validation() {
        assert!(Trace::new(TraceKind::Psd, axis(8), vec![1.0; 8]).is_ok());
        assert!(Trace::new(TraceKind::Psd, axis(7), vec![1.0; 7]).is_err());
        assert!(Trace::new(TraceKind::Psd, axis(8), vec![1.0; 9]).is_err());
        let mut bad = axis(8);
        bad[3] = bad[2];
        assert!(Trace::new(TraceKind::Psd, bad, vec![1.0; 8]).is_err());
        let mut v = vec![1.0; 8];
        v[5] = f64::NAN;
        assert!(Trace::new(TraceKind::Psd, axis(8), v).is_err());
        let mut v = vec![1.0; 8];
        v[0] = -1e-3;
        assert!(Trace::new(TraceKind::TransmissionPower, axis(8), v).is_err());
    }

    #[test]
    fn nearest_index_and_removal() {
        let t = Trace::new(TraceKind::Psd, axis(10), axis(10)).unwrap();
        assert_eq!(t.nearest_index(-5.0), 0);
        assert_eq!(t.nearest_index(3.4), 3);
        assert_eq!(t.nearest_index(3.6), 4);
        assert_eq!(t.nearest_index(50.0), 9);
        let cut = t.without_indices(1..=2).unwrap();
        assert_eq!(cut.len(), 8);
        assert_eq!(cut.values()[1], 3.0);
    }

    #[test]
    fn kind_names_round_trip() {
        for k in [
            TraceKind::TransmissionPower,
            TraceKind::QubitSpectroscopy,
            TraceKind::Psd,
        ] {
            assert_eq!(k.as_str().parse::<TraceKind>().unwrap(), k);
        }
        assert!("vna".parse::<TraceKind>().is_err());
    }
}
