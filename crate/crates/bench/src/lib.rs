//! Fixtures shared by the benchmarks.

use emcal::pipeline::{reference_config, synthesize, Experiment, PipelineKind};
use emcal::synth::Trace;

/// Reference experiment with 1% noise and its synthesized traces.
pub fn fixture(kind: PipelineKind) -> (Experiment, Vec<Trace>) {
    let mut cfg = reference_config(kind);
    cfg.noise.relative_amplitude = 0.01;
    cfg.noise.seed = 17;
    let exp = cfg.resolve().expect("reference config resolves");
    let traces = synthesize(&exp).expect("reference synthesis");
    (exp, traces)
}
