use std::f64::consts::TAU;

use emcal::fit::FitError;
use emcal::pipeline::*;

fn reference(kind: PipelineKind) -> Experiment {
    reference_config(kind).resolve().unwrap()
}

#[test]
fn qubit_round_trip_is_algebraic() {
    let r = run(&reference(PipelineKind::QubitStark)).unwrap();
    let x = r.x.as_ref().unwrap();
    assert!((x.value_per_s / REFERENCE_X_QB - 1.0).abs() < 1e-9, "{}", x.value_per_s);
    let range = r.photon_range.unwrap();
    assert!((range.min / 0.7 - 1.0).abs() < 0.05, "{}", range.min);
    assert!((range.max / 28.0 - 1.0).abs() < 0.05, "{}", range.max);
    // slope close to the reference one
    let slope = r.regression.slope * 1e-9 / TAU.powi(3);
    assert!((slope / REFERENCE_STARK_SLOPE - 1.0).abs() < 0.02, "{slope:e}");
    assert!(x.sigma_per_s > x.sigma_stat_per_s);
    assert_eq!(r.points.len(), 12);
}

#[test]
fn emia_round_trip_through_fits() {
    let r = run(&reference(PipelineKind::Emia)).unwrap();
    let x = r.x.as_ref().unwrap().value_per_s;
    assert!((x / REFERENCE_X_EMIA - 1.0).abs() < 0.01, "{x}");
    let gamma = r.gamma_m.unwrap().hz;
    assert!((gamma / 12.4 - 1.0).abs() < 0.01, "{gamma}");
    let range = r.photon_range.unwrap();
    assert!((range.min / 1.4e6 - 1.0).abs() < 0.1);
    assert!((range.max / 1.4e8 - 1.0).abs() < 0.1);
    assert!(r.excluded.is_empty());
}

#[test]
fn gm0_round_trip() {
    let r = run(&reference(PipelineKind::Gm0Thermal)).unwrap();
    let s = r.thermal_slope_hz2_per_k.unwrap().value;
    assert!((s / REFERENCE_THERMAL_SLOPE - 1.0).abs() < 0.01, "{s}");
    let g = r.g_m0.unwrap().hz;
    assert!((g / REFERENCE_G_M0_HZ - 1.0).abs() < 0.005, "{g}");
    let at_365 = r.points.iter().find(|p| (p.setpoint - 0.365).abs() < 1e-12).unwrap();
    assert!((456.5..458.5).contains(&at_365.observable), "{}", at_365.observable);
    assert!(r.occupation_offset.unwrap().value.abs() < 1e-3);
}

#[test]
fn gm0_recovers_occupation_offset() {
    let mut cfg = reference_config(PipelineKind::Gm0Thermal);
    cfg.gm0.as_mut().unwrap().occupation_offset = 150.0;
    let r = run(&cfg.resolve().unwrap()).unwrap();
    assert!((r.occupation_offset.unwrap().value - 150.0).abs() < 1.0);
    assert!((r.g_m0.unwrap().hz / REFERENCE_G_M0_HZ - 1.0).abs() < 0.005);
}

#[test]
fn literal_slope_convention_differs_by_root_two() {
    let mut cfg = reference_config(PipelineKind::Gm0Thermal);
    cfg.gm0.as_mut().unwrap().slope_convention = SlopeConventionName::Literal;
    let lit = run(&cfg.resolve().unwrap()).unwrap().g_m0.unwrap().hz;
    let cor = run(&reference(PipelineKind::Gm0Thermal)).unwrap().g_m0.unwrap().hz;
    assert!((lit / cor - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for kind in [PipelineKind::QubitStark, PipelineKind::Emia, PipelineKind::Gm0Thermal] {
        let mut cfg = reference_config(kind);
        cfg.noise = NoiseSection {
            relative_amplitude: 0.01,
            seed: 42,
        };
        let exp = cfg.resolve().unwrap();
        let a = run(&exp).unwrap().to_json().unwrap();
        let b = run(&exp).unwrap().to_json().unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn csv_ingest_matches_in_memory() {
    for kind in [PipelineKind::QubitStark, PipelineKind::Emia, PipelineKind::Gm0Thermal] {
        let mut cfg = reference_config(kind);
        cfg.noise = NoiseSection {
            relative_amplitude: 0.01,
            seed: 7,
        };
        let exp = cfg.resolve().unwrap();
        let traces = synthesize(&exp).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_trace_dir(dir.path(), &traces).unwrap();
        let loaded = read_trace_dir(dir.path()).unwrap();
        assert_eq!(loaded, traces);
        let a = calibrate(&exp, &loaded).unwrap().to_json().unwrap();
        let b = run(&exp).unwrap().to_json().unwrap();
        assert_eq!(a, b, "{kind}");
    }
}

#[test]
fn digest_tracks_seed() {
    let mut cfg = reference_config(PipelineKind::Emia);
    cfg.noise.relative_amplitude = 0.01;
    let a = run(&cfg.resolve().unwrap()).unwrap();
    cfg.noise.seed = 1;
    let b = run(&cfg.resolve().unwrap()).unwrap();
    assert_ne!(a.inputs_digest, b.inputs_digest);
    assert_eq!(a.inputs_digest.len(), 64);
}

#[test]
fn setpoints_fall_back_to_the_sweep() {
    let exp = reference(PipelineKind::Emia);
    let traces: Vec<_> = synthesize(&exp)
        .unwrap()
        .into_iter()
        .map(|t| {
            let text = {
                let mut buf = Vec::new();
                emcal::synth::write_trace(&mut buf, &t).unwrap();
                String::from_utf8(buf).unwrap()
            };
            let stripped: String = text
                .lines()
                .filter(|l| !l.starts_with("# p_app_w="))
                .map(|l| format!("{l}\n"))
                .collect();
            emcal::synth::read_trace(stripped.as_bytes()).unwrap()
        })
        .collect();
    assert!(traces[0].meta_f64("p_app_w").is_none());
    let r = calibrate(&exp, &traces).unwrap();
    assert!((r.x.unwrap().value_per_s / REFERENCE_X_EMIA - 1.0).abs() < 0.01);
    assert!(calibrate(&exp, &traces[..5]).is_err());
}

#[test]
fn drive_above_critical_photon_number_is_rejected() {
    let mut cfg = reference_config(PipelineKind::QubitStark);
    cfg.sweep = SweepSection {
        p_app_nw: Some(SweepValues::List(vec![0.1, 1.0, 8.0])),
        ..Default::default()
    };
    match synthesize(&cfg.resolve().unwrap()) {
        Err(PipelineError::AboveCritical { photons, n_crit, .. }) => {
            assert!(photons > n_crit);
            assert!((n_crit - 58.85).abs() < 0.01);
        }
        Err(other) => panic!("{other}"),
        Ok(_) => panic!("accepted a drive above n_crit"),
    }
}

#[test]
fn identical_temperatures_are_degenerate() {
    let mut cfg = reference_config(PipelineKind::Gm0Thermal);
    cfg.sweep.temperature_k = Some(SweepValues::List(vec![0.2, 0.2]));
    let err = run(&cfg.resolve().unwrap()).unwrap_err();
    assert!(matches!(err, PipelineError::Fit(FitError::Degenerate(_))), "{err}");
    cfg.sweep.temperature_k = Some(SweepValues::List(vec![0.1, 0.2]));
    let err = run(&cfg.resolve().unwrap()).unwrap_err();
    assert!(matches!(err, PipelineError::Fit(FitError::InsufficientPoints(2))), "{err}");
}

#[test]
fn empty_sweep_is_a_config_error() {
    let mut cfg = reference_config(PipelineKind::Emia);
    cfg.sweep.p_app_mw = Some(SweepValues::List(vec![]));
    assert!(matches!(cfg.resolve(), Err(PipelineError::Config(_))));
}

#[test]
fn wrong_trace_kind_is_rejected() {
    let psd = synthesize(&reference(PipelineKind::Gm0Thermal)).unwrap();
    assert!(matches!(
        calibrate(&reference(PipelineKind::Emia), &psd),
        Err(PipelineError::Config(_))
    ));
    assert!(calibrate(&reference(PipelineKind::Emia), &[]).is_err());
}

#[test]
fn wide_dips_are_excluded() {
    let mut cfg = reference_config(PipelineKind::Emia);
    // 30 Hz of a 2.9 MHz resonator is ~1e-5; exclude the strongest drives
    cfg.emia.as_mut().unwrap().max_linewidth_fraction_of_kappa = 8e-6;
    let r = run(&cfg.resolve().unwrap()).unwrap();
    assert!(!r.excluded.is_empty());
    assert_eq!(r.excluded.len() + r.points.len(), 20);
    assert!((r.x.unwrap().value_per_s / REFERENCE_X_EMIA - 1.0).abs() < 0.01);
}

#[test]
fn consistency_of_reference_runs() {
    let q = run(&reference(PipelineKind::QubitStark)).unwrap();
    let e = run(&reference(PipelineKind::Emia)).unwrap();
    let v = cross_consistency(&q, &e, DEFAULT_CONSISTENCY_THRESHOLD).unwrap();
    assert!((v.relative_difference - 0.0434).abs() < 1e-3);
    assert!(v.pass);
    assert!(v.photon_span.unwrap() >= 1e8);
}

#[test]
fn selftest_passes() {
    let out = selftest().unwrap();
    assert!(out.pass(), "{out:?}");
}

#[test]
fn plots_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(&reference(PipelineKind::QubitStark)).unwrap();
    let files = write_plots(&r, dir.path()).unwrap();
    assert_eq!(files.len(), 4);
    let svg = std::fs::read_to_string(dir.path().join("stark_slope.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<circle"));
}

#[test]
fn noisy_runs_scatter_around_truth() {
    let mut xs = Vec::new();
    for seed in 0..10 {
        let mut cfg = reference_config(PipelineKind::QubitStark);
        cfg.noise = NoiseSection {
            relative_amplitude: 0.01,
            seed,
        };
        xs.push(run(&cfg.resolve().unwrap()).unwrap().x.unwrap().value_per_s);
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    assert!((mean / REFERENCE_X_QB - 1.0).abs() < 0.005, "{mean}");
}

#[test]
fn shipped_configs_match_reference() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for (file, kind) in [
        ("qubit.toml", PipelineKind::QubitStark),
        ("emia.toml", PipelineKind::Emia),
        ("gm0.toml", PipelineKind::Gm0Thermal),
    ] {
        let cfg = ExperimentConfig::load(dir.join(file)).unwrap();
        assert_eq!(cfg, reference_config(kind), "{file}");
    }
}
