//! Dual photon-number calibration for a microwave resonator coupled to a
//! transmon and a nanomechanical string.
//!
//! The calibration factor `x` that converts applied source power into the
//! intra-resonator photon number is recovered twice: from the ac-Stark shift
//! of the transmon (few photons) and from the electromechanically induced
//! absorption linewidth of the string (millions of photons). The vacuum
//! electromechanical coupling needed by the second route is itself
//! calibrated from thermal motion.
//!
//! - [`physics`]: closed-form models.
//! - [`synth`]: deterministic synthesis of instrument traces.
//! - [`fit`]: Lorentzian and weighted straight-line estimators.
//! - [`pipeline`]: the three calibration pipelines, config and reports.

pub mod fit;
pub mod physics;
pub mod pipeline;
pub mod synth;
pub mod units;

pub use physics::{
    DriveConfig, MechanicsParams, PhysicalConstants, PhysicsError, ResonatorParams, SystemParams,
    TransmonParams, HBAR, K_B,
};
