//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::f64::consts::TAU;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use emcal::physics::{
    anharmonicity_from_two_photon, charging_energy, cooperativity, critical_photon_number,
    ej_ec_ratio, mechanical_quality, normal_mode_frequencies, photon_number,
    stark_slope_per_x, thermal_occupation, thermal_occupation_and_coherence,
    zero_point_fluctuation, DriveConfig, MechanicsParams,
};
use emcal::pipeline::{
    calibrate, read_trace_dir, reference_config, run, synthesize, write_trace_dir,
    CalibrationReport, Experiment, PipelineKind, REFERENCE_STARK_SLOPE, REFERENCE_X_EMIA,
    REFERENCE_X_QB,
};
use emcal::synth::{emia_s21, linspace};
use emcal::units::{hz, to_hz};

type Check = Result<String, String>;

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn within(name: &str, value: f64, expected: f64, tol: f64) -> Result<String, String> {
    let msg = format!("{name}={value:.6} (expected {expected}, rel tol {tol:e})");
    if rel(value, expected) <= tol {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn in_range(name: &str, value: f64, lo: f64, hi: f64) -> Result<String, String> {
    let msg = format!("{name}={value:.6} (range [{lo}, {hi}))");
    if value >= lo && value < hi {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn deadline(elapsed: Duration, limit: Duration) -> Result<String, String> {
    let msg = format!("runtime {:.1} ms (< {} s)", elapsed.as_secs_f64() * 1e3, limit.as_secs_f64());
    if elapsed < limit {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Joins sub-checks; fails if any does.
fn all(parts: Vec<Result<String, String>>) -> Check {
    let ok = parts.iter().all(|p| p.is_ok());
    let text = parts
        .into_iter()
        .map(|p| match p {
            Ok(s) => s,
            Err(s) => format!("!{s}"),
        })
        .collect::<Vec<_>>()
        .join("; ");
    if ok {
        Ok(text)
    } else {
        Err(text)
    }
}

fn experiment(kind: PipelineKind) -> Experiment {
    reference_config(kind).resolve().expect("reference config resolves")
}

fn x_of(r: &CalibrationReport) -> f64 {
    r.x.as_ref().expect("report has x").value_per_s
}

fn inversion_identity() -> Check {
    let start = Instant::now();
    let exp = experiment(PipelineKind::QubitStark);
    let q = exp.qubit().unwrap();
    let k = stark_slope_per_x(&exp.system.transmon, exp.system.delta_tc, q.omega_p)
        .map_err(|e| e.to_string())?;
    let slope_per_w = REFERENCE_STARK_SLOPE * TAU.powi(3) * 1e9;
    let x = slope_per_w / k;
    let elapsed = start.elapsed();
    all(vec![
        in_range("x_qb", x, 5.42, 5.88),
        deadline(elapsed, Duration::from_secs(1)),
    ])
}

fn stark_round_trip() -> (Check, Option<CalibrationReport>) {
    let start = Instant::now();
    let r = match run(&experiment(PipelineKind::QubitStark)) {
        Ok(r) => r,
        Err(e) => return (Err(e.to_string()), None),
    };
    let elapsed = start.elapsed();
    let Some(range) = r.photon_range else {
        return (Err("no photon range".into()), None);
    };
    let check = all(vec![
        within("x", x_of(&r), REFERENCE_X_QB, 1e-9),
        within("n_min", range.min, 0.7, 0.05),
        within("n_max", range.max, 28.0, 0.05),
        deadline(elapsed, Duration::from_secs(1)),
    ]);
    (check, Some(r))
}

fn emia_round_trip() -> (Check, Option<CalibrationReport>) {
    let start = Instant::now();
    let exp = experiment(PipelineKind::Emia);
    let r = match run(&exp) {
        Ok(r) => r,
        Err(e) => return (Err(e.to_string()), None),
    };
    let elapsed = start.elapsed();
    let (Some(range), Some(gamma)) = (r.photon_range, r.gamma_m) else {
        return (Err("report lacks photon range or gamma_m".into()), None);
    };
    let points = exp.emia().unwrap().points;
    let check = all(vec![
        within("x", x_of(&r), REFERENCE_X_EMIA, 0.01),
        within("gamma_m_hz", gamma.hz, 12.4, 0.01),
        within("n_min", range.min, 1.4e6, 0.10),
        within("n_max", range.max, 1.4e8, 0.10),
        Ok(format!("{} powers x {points} points", exp.setpoints.len())),
        deadline(elapsed, Duration::from_secs(10)),
    ]);
    (check, Some(r))
}

fn emia_contrast() -> Check {
    let exp = experiment(PipelineKind::Emia);
    let sys = exp.system;
    let m = &sys.mechanics;
    let kappa = sys.resonator.kappa;
    let x = REFERENCE_X_EMIA;
    let omega_d = sys.resonator.omega_c - m.omega_m;
    let per_watt = photon_number(1.0, x, omega_d, kappa, -m.omega_m).map_err(|e| e.to_string())?;
    let p = kappa * m.gamma_m / (4.0 * m.g_m0 * m.g_m0) / per_watt;
    let drive = DriveConfig::red_sideband(p, x, sys.resonator.omega_c, m.omega_m).map_err(|e| e.to_string())?;
    let c = cooperativity(p * per_watt, m, kappa).map_err(|e| e.to_string())?;
    let center = to_hz(sys.resonator.omega_c);
    let axis = linspace(center - 100.0, center + 100.0, 201);
    let on = emia_s21(&sys, &drive, kappa, &axis).map_err(|e| e.to_string())?;
    let off = DriveConfig { p_app: 0.0, ..drive };
    let base = emia_s21(&sys, &off, kappa, &axis).map_err(|e| e.to_string())?;
    let floor = on.values()[100] / base.values()[100];
    all(vec![
        within("C", c, 1.0, 1e-9),
        in_range("floor/baseline", floor, 0.245, 0.255),
    ])
}

fn thermal() -> Check {
    let start = Instant::now();
    let exp = experiment(PipelineKind::Gm0Thermal);
    let r = run(&exp).map_err(|e| e.to_string())?;
    let slope = r.thermal_slope_hz2_per_k.ok_or("no slope")?.value;
    let g = r.g_m0.ok_or("no g_m0")?;
    let n = thermal_occupation(exp.system.mechanics.omega_m, 0.365).map_err(|e| e.to_string())?;
    let from_coupling = 2.0 * g.rad_s * g.rad_s * n / (TAU * TAU);
    let from_slope = slope * 0.365;
    all(vec![
        within("slope_hz2_per_k", slope, 1253.0, 0.01),
        within("g_m0_hz", g.hz, 0.308, 0.01),
        in_range("noise_365mK_from_coupling_hz2", from_coupling, 456.5, 458.5),
        in_range("noise_365mK_from_slope_hz2", from_slope, 456.5, 458.5),
        Ok(format!("runtime {:.1} ms", start.elapsed().as_secs_f64() * 1e3)),
    ])
}

fn cross_consistency(qb: &CalibrationReport, emia: &CalibrationReport) -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = dir.path().join("qubit.json");
    let b = dir.path().join("emia.json");
    qb.save(&a).map_err(|e| e.to_string())?;
    emia.save(&b).map_err(|e| e.to_string())?;
    let out = Command::new(env!("CARGO_BIN_EXE_emcal"))
        .args(["check", "--report-a"])
        .arg(&a)
        .arg("--report-b")
        .arg(&b)
        .args(["--threshold", "0.05"])
        .output()
        .map_err(|e| e.to_string())?;
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| format!("verdict: {e}"))?;
    let diff = v["relative_difference"].as_f64().ok_or("no relative_difference")?;
    let span = v["photon_span"].as_f64().ok_or("no photon_span")?;
    let pass = v["pass"].as_bool() == Some(true) && out.status.success();
    all(vec![
        in_range("relative_difference", diff, 0.042, 0.044),
        if pass { Ok("pass at 5%".into()) } else { Err(format!("verdict fail, exit {:?}", out.status.code())) },
        if span >= 1e8 { Ok(format!("span={span:.3e}")) } else { Err(format!("span={span:.3e} < 1e8")) },
    ])
}

fn scalars() -> Check {
    let e = |e: emcal::physics::PhysicsError| e.to_string();
    let n_crit = critical_photon_number(hz(134e6), hz(2.056e9)).map_err(e)?;
    let alpha = anharmonicity_from_two_photon(hz(7.916e9), 2.0 * hz(7.8220e9)).map_err(e)?;
    let ratio = ej_ec_ratio(hz(7.916e9), charging_energy(-hz(188e6))).map_err(e)?;
    let (lo, hi) = normal_mode_frequencies(hz(5.862e9), hz(5.862e9), hz(134.1e6)).map_err(e)?;
    let string = MechanicsParams::new(hz(3.15018e6), hz(12.4), hz(0.308), 2e-15).map_err(e)?;
    let (_, tau) = thermal_occupation_and_coherence(&string, 0.05).map_err(e)?;
    let q = mechanical_quality(hz(3.15018e6), hz(33.5)).map_err(e)?;
    let x_zpf = zero_point_fluctuation(&string).map_err(e)?;
    all(vec![
        if n_crit.round() == 59.0 {
            Ok(format!("n_crit={n_crit:.2} rounds to 59"))
        } else {
            Err(format!("n_crit={n_crit:.2}"))
        },
        within("E_J/E_C", ratio, 222.0, 0.01),
        within("alpha_mhz", to_hz(alpha) / 1e6, -188.0, 1e-9),
        within("splitting_mhz", to_hz(hi - lo) / 1e6, 268.2, 1e-9),
        within("tau_coh_us", tau * 1e6, 38.0, 0.03),
        within("Q_m", q, 94_000.0, 0.01),
        within("x_zpf_fm", x_zpf * 1e15, 35.0, 0.10),
    ])
}

struct Spread {
    bias: f64,
    sigma_ratio: f64,
}

fn monte_carlo(kind: PipelineKind, x_true: f64, seeds: u64) -> Result<Spread, String> {
    let mut cfg = reference_config(kind);
    cfg.noise.relative_amplitude = 0.01;
    let mut xs = Vec::new();
    let mut reported = Vec::new();
    for seed in 0..seeds {
        cfg.noise.seed = seed;
        let exp = cfg.resolve().map_err(|e| e.to_string())?;
        let r = run(&exp).map_err(|e| format!("{kind} seed {seed}: {e}"))?;
        let x = r.x.ok_or("no x")?;
        xs.push(x.value_per_s);
        reported.push(x.sigma_stat_per_s);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let sigma = reported.iter().sum::<f64>() / n;
    Ok(Spread {
        bias: mean / x_true - 1.0,
        sigma_ratio: sigma / sd,
    })
}

fn noise_robustness() -> Check {
    let start = Instant::now();
    let mut parts = Vec::new();
    for (name, kind, x) in [
        ("qubit", PipelineKind::QubitStark, REFERENCE_X_QB),
        ("emia", PipelineKind::Emia, REFERENCE_X_EMIA),
    ] {
        let s = monte_carlo(kind, x, 100)?;
        let msg = format!("{name} bias={:+.3e} sigma_ratio={:.3}", s.bias, s.sigma_ratio);
        parts.push(if s.bias.abs() < 5e-3 && (s.sigma_ratio - 1.0).abs() <= 0.30 {
            Ok(msg)
        } else {
            Err(msg)
        });
    }
    parts.push(deadline(start.elapsed(), Duration::from_secs(120)));
    all(parts)
}

fn determinism() -> Check {
    let mut parts = Vec::new();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for kind in [PipelineKind::QubitStark, PipelineKind::Emia, PipelineKind::Gm0Thermal] {
        let mut cfg = reference_config(kind);
        cfg.noise.relative_amplitude = 0.01;
        cfg.noise.seed = 1234;
        let exp = cfg.resolve().map_err(|e| e.to_string())?;
        let a = run(&exp).map_err(|e| e.to_string())?.to_json().map_err(|e| e.to_string())?;
        let b = run(&exp).map_err(|e| e.to_string())?.to_json().map_err(|e| e.to_string())?;
        let traces = synthesize(&exp).map_err(|e| e.to_string())?;
        let sub = dir.path().join(kind.as_str());
        write_trace_dir(&sub, &traces).map_err(|e| e.to_string())?;
        let back = read_trace_dir(&sub).map_err(|e| e.to_string())?;
        let c = calibrate(&exp, &back).map_err(|e| e.to_string())?.to_json().map_err(|e| e.to_string())?;
        let msg = format!("{kind}: repeat {} / ingest {}", a == b, a == c);
        parts.push(if a == b && a == c { Ok(msg) } else { Err(msg) });
    }
    all(parts)
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: u32, title: &str, c: Check| {
        match &c {
            Ok(s) => println!("PASS {id} {title}: {s}"),
            Err(s) => {
                failed += 1;
                println!("FAIL {id} {title}: {s}")
            }
        }
    };

    report(1, "inversion identity", inversion_identity());
    let (c2, qb_report) = stark_round_trip();
    report(2, "stark round trip", c2);
    let (c3, em_report) = emia_round_trip();
    report(3, "emia round trip", c3);
    report(4, "emia contrast", emia_contrast());
    report(5, "thermal calibration", thermal());
    let c6 = match (&qb_report, &em_report) {
        (Some(a), Some(b)) => cross_consistency(a, b),
        _ => Err("round-trip reports unavailable".into()),
    };
    report(6, "cross consistency", c6);
    report(7, "scalar reproductions", scalars());
    report(8, "noise robustness", noise_robustness());
    report(9, "determinism and round trip", determinism());

    if failed == 0 {
        println!("all 9 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
