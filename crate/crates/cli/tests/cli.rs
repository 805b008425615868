use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use emcal::pipeline::{reference_config, run, CalibrationReport, PipelineKind};

fn emcal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emcal"))
        .args(args)
        .output()
        .expect("spawn emcal")
}

fn configs() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs"))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synth_then_calibrate_from_traces_matches_in_memory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("emia.toml");
    let traces = dir.path().join("traces");
    let report = dir.path().join("report.json");

    let out = emcal(&["synth", "--config", s(&cfg), "--out", s(&traces), "--seed", "9"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_dir(&traces).unwrap().count(), 20);

    let out = emcal(&[
        "calibrate", "emia", "--config", s(&cfg), "--traces", s(&traces),
        "--report", s(&report), "--seed", "9",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let mut c = reference_config(PipelineKind::Emia);
    c.noise.seed = 9;
    let expected = run(&c.resolve().unwrap()).unwrap().to_json().unwrap();
    assert_eq!(fs::read_to_string(&report).unwrap(), expected);
}

#[test]
fn calibrate_writes_plots_and_loadable_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let plots = dir.path().join("fig");
    let out = emcal(&[
        "calibrate", "gm0", "--config", s(&configs().join("gm0.toml")),
        "--report", s(&report), "--plots", s(&plots),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = CalibrationReport::load(&report).unwrap();
    assert!(r.g_m0.is_some());
    assert!(plots.join("thermal_noise.svg").exists());
}

#[test]
fn pipeline_mismatch_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = emcal(&[
        "calibrate", "qubit", "--config", s(&configs().join("gm0.toml")),
        "--report", s(&dir.path().join("r.json")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_key_and_missing_file_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    let text = fs::read_to_string(configs().join("qubit.toml")).unwrap();
    fs::write(&bad, format!("bogus = 1\n{text}")).unwrap();
    let report = dir.path().join("r.json");
    let out = emcal(&["calibrate", "qubit", "--config", s(&bad), "--report", s(&report)]);
    assert_eq!(out.status.code(), Some(2));
    let out = emcal(&[
        "calibrate", "qubit", "--config", s(&dir.path().join("none.toml")),
        "--report", s(&report),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn overlapping_thermal_peak_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = reference_config(PipelineKind::Gm0Thermal);
    let cfg = dir.path().join("gm0.toml");
    fs::write(&cfg, c.to_toml_string().unwrap()).unwrap();
    let traces = dir.path().join("t");
    assert!(emcal(&["synth", "--config", s(&cfg), "--out", s(&traces)]).status.success());
    // analyse with a calibration tone hint that sits on the thermal peak
    c.gm0.as_mut().unwrap().omega_mod_mhz = c.system.omega_m_mhz;
    fs::write(&cfg, c.to_toml_string().unwrap()).unwrap();
    let out = emcal(&[
        "calibrate", "gm0", "--config", s(&cfg), "--traces", s(&traces),
        "--report", s(&dir.path().join("r.json")),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    run(&reference_config(PipelineKind::QubitStark).resolve().unwrap())
        .unwrap()
        .save(&a)
        .unwrap();
    run(&reference_config(PipelineKind::Emia).resolve().unwrap())
        .unwrap()
        .save(&b)
        .unwrap();
    let out = emcal(&["check", "--report-a", s(&a), "--report-b", s(&b)]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], true);

    let out = emcal(&["check", "--report-a", s(&a), "--report-b", s(&b), "--threshold", "0.01"]);
    assert_eq!(out.status.code(), Some(4));

    let g = dir.path().join("g.json");
    run(&reference_config(PipelineKind::Gm0Thermal).resolve().unwrap())
        .unwrap()
        .save(&g)
        .unwrap();
    let out = emcal(&["check", "--report-a", s(&a), "--report-b", s(&g)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn selftest_and_template() {
    assert!(emcal(&["selftest"]).status.success());
    let out = emcal(&["template", "qubit"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, fs::read_to_string(configs().join("qubit.toml")).unwrap());
}

#[test]
fn unwritable_report_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = emcal(&[
        "calibrate", "qubit", "--config", s(&configs().join("qubit.toml")),
        "--report", s(&blocker.join("r.json")),
    ]);
    assert_eq!(out.status.code(), Some(1));
}
