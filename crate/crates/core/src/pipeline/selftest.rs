use serde::Serialize;

use super::{
    cross_consistency, reference_config, run, ConsistencyVerdict, PipelineKind, Result,
    DEFAULT_CONSISTENCY_THRESHOLD, REFERENCE_G_M0_HZ, REFERENCE_X_EMIA, REFERENCE_X_QB,
};

#[derive(Clone, Debug, Serialize)]
pub struct SelftestCheck {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub relative_tolerance: f64,
    pub pass: bool,
}

impl SelftestCheck {
    fn new(name: &str, value: f64, expected: f64, relative_tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            expected,
            relative_tolerance,
            pass: ((value - expected) / expected).abs() <= relative_tolerance,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SelftestOutcome {
    pub checks: Vec<SelftestCheck>,
    pub consistency: ConsistencyVerdict,
}

impl SelftestOutcome {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass) && self.consistency.pass
    }
}

/// Runs the three pipelines noiselessly on the reference device and checks
/// that the injected values come back.
pub fn selftest() -> Result<SelftestOutcome> {
    let qubit = run(&reference_config(PipelineKind::QubitStark).resolve()?)?;
    let emia = run(&reference_config(PipelineKind::Emia).resolve()?)?;
    let gm0 = run(&reference_config(PipelineKind::Gm0Thermal).resolve()?)?;

    let x_qb = qubit.x.as_ref().map_or(f64::NAN, |x| x.value_per_s);
    let x_emia = emia.x.as_ref().map_or(f64::NAN, |x| x.value_per_s);
    let g_m0 = gm0.g_m0.map_or(f64::NAN, |g| g.hz);
    let checks = vec![
        SelftestCheck::new("x_qb_per_s", x_qb, REFERENCE_X_QB, 1e-9),
        SelftestCheck::new("x_emia_per_s", x_emia, REFERENCE_X_EMIA, 1e-2),
        SelftestCheck::new("g_m0_hz", g_m0, REFERENCE_G_M0_HZ, 5e-3),
    ];
    let consistency = cross_consistency(&qubit, &emia, DEFAULT_CONSISTENCY_THRESHOLD)?;
    Ok(SelftestOutcome {
        checks,
        consistency,
    })
}
