//! Device parameters and sweeps of the reference experiment.

use super::config::{
    EmiaSection, ExperimentConfig, Gm0Section, KappaRow, KappaSection, NoiseSection,
    QubitSection, SlopeConventionName, Spacing, SweepRange, SweepSection, SweepValues,
    SystemSection, UncertaintySection,
};
use super::PipelineKind;

/// Injected calibration factor of the qubit route, 1/s.
pub const REFERENCE_X_QB: f64 = 5.65;
/// Injected calibration factor of the absorption route, 1/s.
pub const REFERENCE_X_EMIA: f64 = 5.41;
/// Vacuum electromechanical coupling g_m0/2π, Hz.
pub const REFERENCE_G_M0_HZ: f64 = 0.308;
/// Slope of ⟨δω²⟩/(2π)² versus temperature, Hz²/K.
pub const REFERENCE_THERMAL_SLOPE: f64 = 1253.0;
/// Reference slope of δω·κ² versus applied power, divided by (2π)³, in 1/(s³·nW).
pub const REFERENCE_STARK_SLOPE: f64 = -1.30e20;

/// Resonator linewidth versus drive power in the absorption regime. The
/// endpoints are pinned by the reported photon-number range; the interior
/// only reproduces the shape (dip, then rise to 2.9 MHz).
pub const EMIA_KAPPA_TABLE_MW_MHZ: [(f64, f64); 7] = [
    (0.9, 2.3641),
    (2.0, 1.95),
    (5.0, 1.85),
    (10.0, 2.0),
    (30.0, 2.4),
    (60.0, 2.7),
    (97.0, 2.9),
];

/// Temperatures of the thermal calibration, K.
pub const GM0_TEMPERATURES_K: [f64; 6] = [0.05, 0.1, 0.2, 0.3, 0.365, 0.4];

fn base_system() -> SystemSection {
    SystemSection {
        omega_c_ghz: 5.875,
        kappa_mhz: 1.468,
        omega_q_max_ghz: 7.916,
        alpha_mhz: -188.0,
        g_tc_mhz: 134.0,
        delta_tc_ghz: 2.056,
        omega_m_mhz: 3.15018,
        gamma_m_hz: 12.4,
        g_m0_hz: REFERENCE_G_M0_HZ,
        mass_pg: 2.0,
    }
}

fn reference_uncertainties() -> UncertaintySection {
    UncertaintySection {
        g_tc_mhz: 2.3,
        alpha_mhz: 1.0,
        kappa_mhz: 0.022,
        g_m0_hz: 0.004,
    }
}

/// Noiseless configuration of one pipeline with the reference device.
pub fn reference_config(kind: PipelineKind) -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        pipeline: kind,
        x_true_per_s: None,
        system: base_system(),
        uncertainties: reference_uncertainties(),
        kappa_model: None,
        sweep: SweepSection::default(),
        noise: NoiseSection::default(),
        qubit: None,
        emia: None,
        gm0: None,
    };
    match kind {
        PipelineKind::QubitStark => {
            cfg.x_true_per_s = Some(REFERENCE_X_QB);
            // working point of the dispersive measurement
            cfg.system.omega_c_ghz = 5.862;
            cfg.system.kappa_mhz = 1.53;
            cfg.kappa_model = Some(KappaSection::Linear {
                offset_mhz: 1.53,
                slope_khz_per_nw: 181.0,
            });
            cfg.sweep.p_app_nw = Some(SweepValues::Range(SweepRange {
                start: 0.022,
                stop: 1.2,
                points: 12,
                spacing: Spacing::Linear,
            }));
            cfg.qubit = Some(QubitSection {
                omega_p_ghz: 5.862,
                omega_q0_ghz: None,
                linewidth_mhz: 2.0,
                window_linewidths: 10.0,
                points: 801,
            });
        }
        PipelineKind::Emia => {
            cfg.x_true_per_s = Some(REFERENCE_X_EMIA);
            cfg.kappa_model = Some(KappaSection::Tabulated {
                table: EMIA_KAPPA_TABLE_MW_MHZ
                    .iter()
                    .map(|&(p_app_mw, kappa_mhz)| KappaRow { p_app_mw, kappa_mhz })
                    .collect(),
            });
            cfg.sweep.p_app_mw = Some(SweepValues::Range(SweepRange {
                start: 0.9,
                stop: 97.0,
                points: 20,
                spacing: Spacing::Log,
            }));
            cfg.emia = Some(EmiaSection::default());
        }
        PipelineKind::Gm0Thermal => {
            cfg.system.gamma_m_hz = 33.5;
            cfg.sweep.temperature_k = Some(SweepValues::List(GM0_TEMPERATURES_K.to_vec()));
            cfg.gm0 = Some(Gm0Section {
                omega_mod_mhz: 3.1498,
                modulation_depth_hz: 80.0,
                enbw_hz: 1.0,
                window_linewidths: 30.0,
                points: 1601,
                occupation_offset: 0.0,
                slope_convention: SlopeConventionName::Corrected,
            });
        }
    }
    cfg
}
