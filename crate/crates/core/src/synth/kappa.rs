use serde::{Deserialize, Serialize};

use super::{Result, SynthError};

/// Resonator linewidth as a function of applied power.
///
/// `Linear` is `offset + slope·P`; `Tabulated` interpolates linearly between
/// measured `(P, κ)` pairs and clamps outside the table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum KappaModel {
    /// `offset` in rad/s, `slope` in rad/s per W.
    Linear { offset: f64, slope: f64 },
    /// `(power W, kappa rad/s)` pairs with strictly increasing power.
    Tabulated { table: Vec<(f64, f64)> },
}

impl KappaModel {
    pub fn linear(offset: f64, slope: f64) -> Result<Self> {
        let m = KappaModel::Linear { offset, slope };
        m.validate()?;
        Ok(m)
    }

    pub fn tabulated(table: Vec<(f64, f64)>) -> Result<Self> {
        let m = KappaModel::Tabulated { table };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            KappaModel::Linear { offset, slope } => {
                if !(offset.is_finite() && *offset > 0.0) {
                    return Err(SynthError::Configuration(format!(
                        "linear kappa model needs a positive offset, got {offset}"
                    )));
                }
                if !slope.is_finite() {
                    return Err(SynthError::Configuration("kappa slope is not finite".into()));
                }
            }
            KappaModel::Tabulated { table } => {
                if table.len() < 2 {
                    return Err(SynthError::Configuration(format!(
                        "tabulated kappa model needs at least 2 entries, got {}",
                        table.len()
                    )));
                }
                if table
                    .iter()
                    .any(|(p, k)| !(p.is_finite() && *p >= 0.0 && k.is_finite() && *k > 0.0))
                {
                    return Err(SynthError::Configuration(
                        "kappa table entries need finite P >= 0 and kappa > 0".into(),
                    ));
                }
                if table.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(SynthError::Configuration(
                        "kappa table powers must be strictly increasing".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Linewidth (rad/s) at applied power `p_app` (W).
    pub fn kappa_at_power(&self, p_app: f64) -> Result<f64> {
        self.validate()?;
        if !(p_app.is_finite() && p_app >= 0.0) {
            return Err(SynthError::Domain(format!("p_app = {p_app} must be >= 0")));
        }
        let kappa = match self {
            KappaModel::Linear { offset, slope } => offset + slope * p_app,
            KappaModel::Tabulated { table } => interpolate_clamped(table, p_app),
        };
        if kappa > 0.0 {
            Ok(kappa)
        } else {
            Err(SynthError::Domain(format!(
                "kappa model gives nonpositive linewidth {kappa} at {p_app} W"
            )))
        }
    }
}

fn interpolate_clamped(table: &[(f64, f64)], p: f64) -> f64 {
    let (first, last) = (table[0], table[table.len() - 1]);
    if p <= first.0 {
        return first.1;
    }
    if p >= last.0 {
        return last.1;
    }
    let i = table.partition_point(|(tp, _)| *tp <= p);
    let (p0, k0) = table[i - 1];
    let (p1, k1) = table[i];
    k0 + (k1 - k0) * (p - p0) / (p1 - p0)
}
