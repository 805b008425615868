//! Parameter extraction: Lorentzian lineshape fits, weighted straight-line
//! regression and the PSD peak-ratio measurement.

mod line;
mod lorentzian;
mod psd;

pub use line::{weighted_line_fit, LineFitResult, LinePoint};
pub use lorentzian::{
    lorentzian_fit, lorentzian_fit_with, FitOptions, LorentzianFitResult, LorentzianParams,
};
pub use psd::{psd_peak_ratio, PeakRatio, SPUR_SEARCH_BINS};

use thiserror::Error;

use crate::synth::SynthError;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("need more points, got {0}")]
    InsufficientPoints(usize),
    #[error("window spans {span_hz} Hz, less than two linewidths of {fwhm_hz} Hz")]
    InsufficientSpan { span_hz: f64, fwhm_hz: f64 },
    #[error("fit did not converge after {iterations} iterations")]
    NotConverged { iterations: usize },
    #[error("peaks not resolved: {0}")]
    Resolution(String),
    #[error(transparent)]
    Trace(#[from] SynthError),
}

pub type Result<T> = std::result::Result<T, FitError>;
