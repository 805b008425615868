use serde::{Deserialize, Serialize};

use super::{FitError, Result};

/// One regression point. `sigma: None` means unweighted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinePoint {
    pub x: f64,
    pub y: f64,
    pub sigma: Option<f64>,
}

impl LinePoint {
    pub fn new(x: f64, y: f64, sigma: f64) -> Self {
        Self { x, y, sigma: Some(sigma) }
    }

    pub fn unweighted(x: f64, y: f64) -> Self {
        Self { x, y, sigma: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFitResult {
    pub slope: f64,
    pub intercept: f64,
    pub slope_sigma: f64,
    pub intercept_sigma: f64,
    /// Covariance between slope and intercept.
    pub covariance: f64,
    pub chi2_reduced: f64,
    pub n_points: usize,
}

impl LineFitResult {
    pub fn eval(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Straight-line least squares `y = intercept + slope·x`.
///
/// With per-point sigmas the fit is weighted by `1/σ²` and the parameter
/// uncertainties take the sigmas as absolute. Without sigmas (all `None`) the
/// points get unit weight and the uncertainties are scaled by the residual
/// variance. Mixing the two is an error.
pub fn weighted_line_fit(points: &[LinePoint]) -> Result<LineFitResult> {
    let n = points.len();
    if n < 2 {
        return Err(FitError::InsufficientPoints(n));
    }
    let weighted = points[0].sigma.is_some();
    if points.iter().any(|p| p.sigma.is_some() != weighted) {
        return Err(FitError::Degenerate("mixed weighted and unweighted points".into()));
    }
    if let Some(p) = points.iter().find(|p| !(p.x.is_finite() && p.y.is_finite())) {
        return Err(FitError::Degenerate(format!("non-finite point ({}, {})", p.x, p.y)));
    }
    let weights: Vec<f64> = points
        .iter()
        .map(|p| match p.sigma {
            Some(s) if s.is_finite() && s > 0.0 => Ok(1.0 / (s * s)),
            Some(s) => Err(FitError::Degenerate(format!("sigma {s} must be finite and > 0"))),
            None => Ok(1.0),
        })
        .collect::<Result<_>>()?;

    let sw: f64 = weights.iter().sum();
    let x_mean = points.iter().zip(&weights).map(|(p, w)| w * p.x).sum::<f64>() / sw;
    let y_mean = points.iter().zip(&weights).map(|(p, w)| w * p.y).sum::<f64>() / sw;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (p, w) in points.iter().zip(&weights) {
        let dx = p.x - x_mean;
        sxx += w * dx * dx;
        sxy += w * dx * (p.y - y_mean);
    }
    let x_scale = points.iter().map(|p| p.x.abs()).fold(0.0, f64::max);
    if !(sxx > (f64::EPSILON * x_scale).powi(2) * sw * n as f64) {
        return Err(FitError::Degenerate("all x values identical".into()));
    }

    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let chi2: f64 = points
        .iter()
        .zip(&weights)
        .map(|(p, w)| w * (p.y - intercept - slope * p.x).powi(2))
        .sum();
    let dof = n - 2;
    let chi2_reduced = if dof > 0 { chi2 / dof as f64 } else { 0.0 };
    let scale = if weighted { 1.0 } else { chi2_reduced };

    let var_slope = scale / sxx;
    let var_intercept = scale * (1.0 / sw + x_mean * x_mean / sxx);
    Ok(LineFitResult {
        slope,
        intercept,
        slope_sigma: var_slope.sqrt(),
        intercept_sigma: var_intercept.sqrt(),
        covariance: -scale * x_mean / sxx,
        chi2_reduced,
        n_points: n,
    })
}
