//! Closed-form physics of the resonator / transmon / nanostring hybrid.
//!
//! Every rate and frequency in this module is an angular quantity (rad/s).
//! Conversions to ordinary frequency happen at the I/O boundary, see
//! [`crate::units`].

mod cavity;
mod mechanics;
mod transmon;

pub use cavity::{
    ac_stark_shift, cooperativity, critical_photon_number, dispersive_shift_per_photon,
    emia_drive_regressor, emia_effective_linewidth, photon_number, stark_slope_per_x,
};
pub use mechanics::{
    integrated_displacement_noise, mechanical_quality, peak_ratio_for_noise,
    slope_from_vacuum_coupling, thermal_occupation, thermal_occupation_and_coherence,
    vacuum_coupling_from_slope, zero_point_fluctuation, SlopeConvention,
};
pub use transmon::{
    anharmonicity_from_two_photon, charging_energy, ej_ec_ratio, normal_mode_frequencies,
    transmon_flux_frequency,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reduced Planck constant, J·s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (exact).
pub const K_B: f64 = 1.380_649e-23;

/// Fundamental constants used by the models.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub k_b: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            hbar: HBAR,
            k_b: K_B,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhysicsError {
    #[error("{name} = {value} is outside the domain ({requirement})")]
    Domain {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("singular configuration: {0}")]
    Singularity(&'static str),
    #[error("drive is not in the red-sideband configuration: delta_mc = {delta_mc} rad/s, expected {expected} rad/s")]
    NotRedSideband { delta_mc: f64, expected: f64 },
}

pub type Result<T> = std::result::Result<T, PhysicsError>;

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(PhysicsError::Domain {
            name,
            value,
            requirement: "finite and > 0",
        })
    }
}

pub(crate) fn require_nonnegative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(PhysicsError::Domain {
            name,
            value,
            requirement: "finite and >= 0",
        })
    }
}

pub(crate) fn require_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(PhysicsError::Domain {
            name,
            value,
            requirement: "finite",
        })
    }
}

/// Microwave resonator: frequency and total loss rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonatorParams {
    pub omega_c: f64,
    pub kappa: f64,
}

impl ResonatorParams {
    /// Maximum `kappa / omega_c` accepted as a high-Q resonator.
    pub const MAX_LOSS_RATIO: f64 = 1e-2;

    pub fn new(omega_c: f64, kappa: f64) -> Result<Self> {
        require_positive("omega_c", omega_c)?;
        require_positive("kappa", kappa)?;
        if kappa / omega_c >= Self::MAX_LOSS_RATIO {
            return Err(PhysicsError::Domain {
                name: "kappa/omega_c",
                value: kappa / omega_c,
                requirement: "< 1e-2",
            });
        }
        Ok(Self { omega_c, kappa })
    }
}

/// Flux-tunable transmon. The charging energy is not stored: it is `-ħα`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransmonParams {
    /// Sweet-spot |g>↔|e> frequency.
    pub omega_q_max: f64,
    /// Signed anharmonicity, negative for a transmon.
    pub alpha: f64,
    /// Transmon–resonator coupling.
    pub g_tc: f64,
}

impl TransmonParams {
    pub fn new(omega_q_max: f64, alpha: f64, g_tc: f64) -> Result<Self> {
        require_positive("omega_q_max", omega_q_max)?;
        require_positive("g_tc", g_tc)?;
        require_finite("alpha", alpha)?;
        if alpha >= 0.0 {
            return Err(PhysicsError::Domain {
                name: "alpha",
                value: alpha,
                requirement: "< 0 for a transmon",
            });
        }
        Ok(Self {
            omega_q_max,
            alpha,
            g_tc,
        })
    }

    /// Charging energy E_C = -ħα, in joules.
    pub fn e_c(&self) -> f64 {
        charging_energy(self.alpha)
    }
}

/// Nanomechanical string mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MechanicsParams {
    pub omega_m: f64,
    pub gamma_m: f64,
    /// Electromechanical vacuum coupling.
    pub g_m0: f64,
    /// Effective mass, kg.
    pub mass: f64,
}

impl MechanicsParams {
    /// Maximum `gamma_m / omega_m` accepted as a high-Q mode.
    pub const MAX_LOSS_RATIO: f64 = 1e-3;

    pub fn new(omega_m: f64, gamma_m: f64, g_m0: f64, mass: f64) -> Result<Self> {
        require_positive("omega_m", omega_m)?;
        require_positive("gamma_m", gamma_m)?;
        require_positive("g_m0", g_m0)?;
        require_positive("mass", mass)?;
        if gamma_m / omega_m >= Self::MAX_LOSS_RATIO {
            return Err(PhysicsError::Domain {
                name: "gamma_m/omega_m",
                value: gamma_m / omega_m,
                requirement: "< 1e-3",
            });
        }
        Ok(Self {
            omega_m,
            gamma_m,
            g_m0,
            mass,
        })
    }
}

/// Complete physical parameter set of the hybrid device at one working point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub resonator: ResonatorParams,
    pub transmon: TransmonParams,
    pub mechanics: MechanicsParams,
    /// Transmon–resonator detuning at the working point, ω_q − ω_c.
    pub delta_tc: f64,
}

/// Applied tones and the line calibration factor `x = Λ·κ_ext`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    /// Source power before the cryostat, W.
    pub p_app: f64,
    pub omega_p: f64,
    pub omega_d: f64,
    /// Probe detuning ω_p − ω_c.
    pub delta_p: f64,
    /// Drive detuning ω_d − ω_c.
    pub delta_mc: f64,
    /// Calibration factor, 1/s.
    pub x: f64,
}

impl DriveConfig {
    /// Drive parked one mechanical frequency below the resonator, probe on resonance.
    pub fn red_sideband(p_app: f64, x: f64, omega_c: f64, omega_m: f64) -> Result<Self> {
        require_nonnegative("p_app", p_app)?;
        require_positive("x", x)?;
        require_positive("omega_c", omega_c)?;
        require_positive("omega_m", omega_m)?;
        Ok(Self {
            p_app,
            omega_p: omega_c,
            omega_d: omega_c - omega_m,
            delta_p: 0.0,
            delta_mc: -omega_m,
            x,
        })
    }

    /// Checks `delta_mc = -omega_m` to within `tolerance` rad/s.
    pub fn check_red_sideband(&self, omega_m: f64, tolerance: f64) -> Result<()> {
        if (self.delta_mc + omega_m).abs() <= tolerance {
            Ok(())
        } else {
            Err(PhysicsError::NotRedSideband {
                delta_mc: self.delta_mc,
                expected: -omega_m,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::hz;

    #[test]
    fn resonator_rejects_low_q() {
        assert!(ResonatorParams::new(hz(5.862e9), hz(1.53e6)).is_ok());
        assert!(ResonatorParams::new(hz(1e6), hz(1e5)).is_err());
        assert!(ResonatorParams::new(hz(5e9), 0.0).is_err());
        assert!(ResonatorParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn transmon_requires_negative_anharmonicity() {
        assert!(TransmonParams::new(hz(7.916e9), hz(188e6), hz(134e6)).is_err());
        let t = TransmonParams::new(hz(7.916e9), -hz(188e6), hz(134e6)).unwrap();
        assert!(t.e_c() > 0.0);
    }

    #[test]
    fn mechanics_requires_high_q() {
        assert!(MechanicsParams::new(hz(3.15018e6), hz(12.4), hz(0.308), 2e-15).is_ok());
        assert!(MechanicsParams::new(hz(1e3), hz(12.4), hz(0.308), 2e-15).is_err());
        assert!(MechanicsParams::new(hz(3.15e6), hz(12.4), 0.0, 2e-15).is_err());
    }

    #[test]
    fn red_sideband_drive() {
        let wm = hz(3.15018e6);
        let d = DriveConfig::red_sideband(1e-3, 5.41, hz(5.875e9), wm).unwrap();
        assert!(d.check_red_sideband(wm, 1e-6).is_ok());
        let off = DriveConfig {
            delta_mc: -wm + hz(1e3),
            ..d
        };
        assert!(matches!(
            off.check_red_sideband(wm, hz(12.4)),
            Err(PhysicsError::NotRedSideband { .. })
        ));
        assert!(DriveConfig::red_sideband(-1.0, 5.41, 1.0, 1.0).is_err());
    }
}
