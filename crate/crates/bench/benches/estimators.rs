use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use emcal::fit::{lorentzian_fit, psd_peak_ratio};
use emcal::pipeline::{calibrate, run, PipelineKind};
use emcal::units::to_hz;
use emcal_bench::fixture;

fn fits(c: &mut Criterion) {
    let (_, emia) = fixture(PipelineKind::Emia);
    c.bench_function("lorentzian_fit/emia_dip_801", |b| {
        b.iter(|| lorentzian_fit(black_box(&emia[10]), None).unwrap())
    });

    let (exp, psd) = fixture(PipelineKind::Gm0Thermal);
    let g = exp.gm0().unwrap();
    let wm = to_hz(exp.system.mechanics.omega_m);
    let wmod = to_hz(g.omega_mod);
    c.bench_function("psd_peak_ratio/1601", |b| {
        b.iter(|| psd_peak_ratio(black_box(&psd[4]), wm, wmod, g.enbw).unwrap())
    });
}

fn pipelines(c: &mut Criterion) {
    let mut group = c.benchmark_group("calibrate");
    for (name, kind) in [
        ("qubit", PipelineKind::QubitStark),
        ("emia", PipelineKind::Emia),
        ("gm0", PipelineKind::Gm0Thermal),
    ] {
        let (exp, traces) = fixture(kind);
        group.bench_function(name, |b| b.iter(|| calibrate(&exp, black_box(&traces)).unwrap()));
    }
    group.finish();

    let (exp, _) = fixture(PipelineKind::Emia);
    c.bench_function("run/emia_synth_and_calibrate", |b| b.iter(|| run(black_box(&exp)).unwrap()));
}

criterion_group!(benches, fits, pipelines);
criterion_main!(benches);
