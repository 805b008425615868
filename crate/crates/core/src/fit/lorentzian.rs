use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use super::{FitError, Result};
use crate::synth::Trace;

/// Lorentzian line parameters in trace units (Hz on the axis, trace units on
/// the value axis).
///
/// `y = offset + amplitude·(Γ/2)² / ((Γ/2)² + (f − center)²)`
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorentzianParams {
    pub center: f64,
    pub fwhm: f64,
    /// Signed: negative for a dip.
    pub amplitude: f64,
    pub offset: f64,
}

impl LorentzianParams {
    pub fn eval(&self, f: f64) -> f64 {
        let h = 0.5 * self.fwhm;
        let d = f - self.center;
        self.offset + self.amplitude * h * h / (h * h + d * d)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Converged once a step changes the scaled parameters by less than this, relative.
    pub step_tolerance: f64,
    /// Converged once the rms residual drops below this fraction of the value scale.
    pub residual_tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            step_tolerance: 1e-10,
            residual_tolerance: 1e-12,
        }
    }
}

/// Result of [`lorentzian_fit`]. Covariance rows/columns are ordered
/// `(center, fwhm, amplitude, offset)` in trace units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorentzianFitResult {
    pub center: f64,
    pub fwhm: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub covariance: [[f64; 4]; 4],
    pub residual_rms: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl LorentzianFitResult {
    pub fn params(&self) -> LorentzianParams {
        LorentzianParams {
            center: self.center,
            fwhm: self.fwhm,
            amplitude: self.amplitude,
            offset: self.offset,
        }
    }

    pub fn center_sigma(&self) -> f64 {
        self.covariance[0][0].max(0.0).sqrt()
    }

    pub fn fwhm_sigma(&self) -> f64 {
        self.covariance[1][1].max(0.0).sqrt()
    }

    pub fn amplitude_sigma(&self) -> f64 {
        self.covariance[2][2].max(0.0).sqrt()
    }

    pub fn offset_sigma(&self) -> f64 {
        self.covariance[3][3].max(0.0).sqrt()
    }

    /// Errors out on a fit that did not converge.
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(FitError::NotConverged {
                iterations: self.iterations,
            })
        }
    }
}

/// Least-squares Lorentzian fit of `trace` with default options.
///
/// Without `init` the fit seeds itself from the extremum (peak or dip, decided
/// against the median of the outer tenths of the trace), the half-height
/// width around it, and that edge median as offset.
pub fn lorentzian_fit(trace: &Trace, init: Option<LorentzianParams>) -> Result<LorentzianFitResult> {
    lorentzian_fit_with(trace, init, &FitOptions::default())
}

pub fn lorentzian_fit_with(
    trace: &Trace,
    init: Option<LorentzianParams>,
    options: &FitOptions,
) -> Result<LorentzianFitResult> {
    let problem = Scaled::new(trace)?;
    let seed = match init {
        Some(p) => problem.to_scaled(&p),
        None => problem.self_seed(),
    };
    let span = problem.u[problem.u.len() - 1] - problem.u[0];
    if !(seed[1] > 0.0) || span < 2.0 * seed[1] {
        return Err(FitError::InsufficientSpan {
            span_hz: span * problem.x_scale,
            fwhm_hz: seed[1] * problem.x_scale,
        });
    }

    let (p, iterations, converged) = problem.levenberg_marquardt(seed, options);
    let (h, meat, rss) = problem.normal_equations(&p);
    let n = problem.u.len() as f64;
    let h_inv = h.try_inverse().ok_or_else(|| {
        FitError::Degenerate("singular normal matrix at the solution".into())
    })?;
    // heteroscedasticity-consistent (sandwich) covariance
    let cov_scaled = h_inv * meat * h_inv * (n / (n - 4.0));
    let units = Vector4::new(
        problem.x_scale,
        problem.x_scale,
        problem.y_scale,
        problem.y_scale,
    );
    let mut covariance = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in i..4 {
            let c = 0.5 * (cov_scaled[(i, j)] + cov_scaled[(j, i)]) * (units[i] * units[j]);
            covariance[i][j] = c;
            covariance[j][i] = c;
        }
    }
    let params = problem.from_scaled(&p);
    let residual_rms = (rss / n).sqrt() * problem.y_scale;
    if !covariance.iter().flatten().all(|c| c.is_finite()) {
        return Err(FitError::Degenerate("non-finite covariance".into()));
    }
    Ok(LorentzianFitResult {
        center: params.center,
        fwhm: params.fwhm,
        amplitude: params.amplitude,
        offset: params.offset,
        covariance,
        residual_rms,
        converged,
        iterations,
    })
}

/// Seed smoothing uses a window of about `n / SEED_SMOOTHING_DIVISOR` points.
const SEED_SMOOTHING_DIVISOR: usize = 160;

/// Centered moving average over `2·half + 1` points, truncated at the ends.
fn moving_average(v: &[f64], half: usize) -> Vec<f64> {
    if half == 0 {
        return v.to_vec();
    }
    let mut prefix = Vec::with_capacity(v.len() + 1);
    prefix.push(0.0);
    for x in v {
        prefix.push(prefix[prefix.len() - 1] + x);
    }
    (0..v.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(v.len());
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// The fit problem in centered, scaled coordinates:
/// `u = (f − f_ref)/x_scale`, `v = y/y_scale`.
struct Scaled {
    u: Vec<f64>,
    v: Vec<f64>,
    f_ref: f64,
    x_scale: f64,
    y_scale: f64,
}

impl Scaled {
    fn new(trace: &Trace) -> Result<Self> {
        let f = trace.freq_hz();
        let y = trace.values();
        let n = f.len();
        if n < 8 {
            return Err(FitError::InsufficientPoints(n));
        }
        let f_ref = f[n / 2];
        let x_scale = 0.5 * (f[n - 1] - f[0]);
        let (lo, hi) = y
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
        let y_scale = lo.abs().max(hi.abs());
        if !(hi - lo > 1e-14 * y_scale) {
            return Err(FitError::Degenerate("flat trace".into()));
        }
        Ok(Self {
            u: f.iter().map(|fi| (fi - f_ref) / x_scale).collect(),
            v: y.iter().map(|yi| yi / y_scale).collect(),
            f_ref,
            x_scale,
            y_scale,
        })
    }

    fn to_scaled(&self, p: &LorentzianParams) -> Vector4<f64> {
        Vector4::new(
            (p.center - self.f_ref) / self.x_scale,
            p.fwhm / self.x_scale,
            p.amplitude / self.y_scale,
            p.offset / self.y_scale,
        )
    }

    fn from_scaled(&self, p: &Vector4<f64>) -> LorentzianParams {
        LorentzianParams {
            center: self.f_ref + p[0] * self.x_scale,
            fwhm: p[1] * self.x_scale,
            amplitude: p[2] * self.y_scale,
            offset: p[3] * self.y_scale,
        }
    }

    /// Seed from a lightly smoothed copy of the data so that a single noise
    /// spike cannot pass for the extremum.
    fn self_seed(&self) -> Vector4<f64> {
        let n = self.v.len();
        let edge = (n / 10).max(2);
        let mut edges: Vec<f64> = self.v[..edge].iter().chain(&self.v[n - edge..]).copied().collect();
        edges.sort_by(f64::total_cmp);
        let m = edges.len();
        let baseline = if m % 2 == 0 {
            0.5 * (edges[m / 2 - 1] + edges[m / 2])
        } else {
            edges[m / 2]
        };

        let y = moving_average(&self.v, n / SEED_SMOOTHING_DIVISOR / 2);
        let (i_max, i_min) = (0..n).fold((0, 0), |(imax, imin), i| {
            (
                if y[i] > y[imax] { i } else { imax },
                if y[i] < y[imin] { i } else { imin },
            )
        });
        let ext = if y[i_max] - baseline >= baseline - y[i_min] {
            i_max
        } else {
            i_min
        };
        let amplitude = y[ext] - baseline;
        let half = 0.5 * amplitude.abs();
        let above = |i: usize| (y[i] - baseline).abs() > half;

        let crossing = |from: usize, to: usize| -> f64 {
            // linear interpolation of the half-height crossing between two samples
            let (d0, d1) = ((y[from] - baseline).abs() - half, (y[to] - baseline).abs() - half);
            let t = if d0 != d1 { d0 / (d0 - d1) } else { 0.5 };
            self.u[from] + t * (self.u[to] - self.u[from])
        };
        let mut l = ext;
        while l > 0 && above(l - 1) {
            l -= 1;
        }
        let left = if l == 0 { self.u[0] } else { crossing(l, l - 1) };
        let mut r = ext;
        while r + 1 < n && above(r + 1) {
            r += 1;
        }
        let right = if r + 1 == n { self.u[n - 1] } else { crossing(r, r + 1) };
        let min_width = 2.0 * (self.u[1] - self.u[0]);
        let fwhm = (right - left).max(min_width);

        Vector4::new(self.u[ext], fwhm, amplitude, baseline)
    }

    fn residuals_cost(&self, p: &Vector4<f64>) -> f64 {
        let (c, h, a, o) = (p[0], 0.5 * p[1], p[2], p[3]);
        let h2 = h * h;
        self.u
            .iter()
            .zip(&self.v)
            .map(|(u, v)| {
                let d = u - c;
                let r = v - (o + a * h2 / (h2 + d * d));
                r * r
            })
            .sum()
    }

    /// `(JᵀJ, Σ r²·J Jᵀ, Σ r²)` at `p`; `J` is the model Jacobian.
    fn normal_equations(&self, p: &Vector4<f64>) -> (Matrix4<f64>, Matrix4<f64>, f64) {
        let (mut jtj, mut meat, mut rss) = (Matrix4::zeros(), Matrix4::zeros(), 0.0);
        for (u, v) in self.u.iter().zip(&self.v) {
            let (j, r) = self.jacobian_row(p, *u, *v);
            let outer = j * j.transpose();
            jtj += outer;
            meat += outer * (r * r);
            rss += r * r;
        }
        (jtj, meat, rss)
    }

    fn jacobian_row(&self, p: &Vector4<f64>, u: f64, v: f64) -> (Vector4<f64>, f64) {
        let (c, h, a, o) = (p[0], 0.5 * p[1], p[2], p[3]);
        let d = u - c;
        let h2 = h * h;
        let den = h2 + d * d;
        let shape = h2 / den;
        let den2 = den * den;
        let j = Vector4::new(
            a * 2.0 * h2 * d / den2,
            a * h * d * d / den2,
            shape,
            1.0,
        );
        (j, v - (o + a * shape))
    }

    fn gradient_system(&self, p: &Vector4<f64>) -> (Matrix4<f64>, Vector4<f64>) {
        let mut jtj = Matrix4::zeros();
        let mut jtr = Vector4::zeros();
        for (u, v) in self.u.iter().zip(&self.v) {
            let (j, r) = self.jacobian_row(p, *u, *v);
            jtj += j * j.transpose();
            jtr += j * r;
        }
        (jtj, jtr)
    }

    /// Damped Gauss–Newton with Marquardt diagonal scaling.
    fn levenberg_marquardt(&self, mut p: Vector4<f64>, opt: &FitOptions) -> (Vector4<f64>, usize, bool) {
        let n = self.u.len() as f64;
        let mut cost = self.residuals_cost(&p);
        let mut lambda = 1e-3;
        let (mut jtj, mut jtr) = self.gradient_system(&p);

        for iteration in 1..=opt.max_iterations {
            if (cost / n).sqrt() <= opt.residual_tolerance {
                return (p, iteration - 1, true);
            }
            let mut damped = jtj;
            for i in 0..4 {
                damped[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
            }
            let Some(step) = damped.cholesky().map(|c| c.solve(&jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let small_step = step.norm() <= opt.step_tolerance * (p.norm() + opt.step_tolerance);
            let trial = p + step;
            let trial_cost = if trial[1] > 0.0 {
                self.residuals_cost(&trial)
            } else {
                f64::INFINITY
            };
            if trial_cost <= cost {
                p = trial;
                cost = trial_cost;
                if small_step {
                    return (p, iteration, true);
                }
                lambda = (lambda * 0.1).max(1e-12);
                (jtj, jtr) = self.gradient_system(&p);
            } else {
                if small_step {
                    // no further progress possible at this precision
                    return (p, iteration, true);
                }
                lambda *= 10.0;
                if lambda > 1e16 {
                    return (p, iteration, false);
                }
            }
        }
        (p, opt.max_iterations, false)
    }
}
