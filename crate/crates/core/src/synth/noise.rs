use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Result, Trace};

/// Multiplicative Gaussian noise: each value becomes `v·(1 + a·z)`, `z ~ N(0, 1)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub relative_amplitude: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(relative_amplitude: f64, seed: u64) -> Self {
        Self {
            relative_amplitude,
            seed,
        }
    }

    pub fn noiseless() -> Self {
        Self::default()
    }

    /// The noise stream for trace number `index` of a sweep.
    pub fn for_trace(&self, index: u64) -> Self {
        Self {
            relative_amplitude: self.relative_amplitude,
            seed: derive_seed(self.seed, index),
        }
    }
}

/// SplitMix64 mix of a base seed and a stream index. Per-trace streams depend
/// only on `(seed, index)`, so serial and parallel sweeps agree.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Applies `spec` to `trace`. Zero amplitude returns an identical copy.
pub fn add_noise(trace: &Trace, spec: &NoiseSpec) -> Result<Trace> {
    if spec.relative_amplitude == 0.0 {
        return Ok(trace.clone());
    }
    if !(spec.relative_amplitude.is_finite() && spec.relative_amplitude > 0.0) {
        return Err(super::SynthError::Configuration(format!(
            "noise amplitude {} must be >= 0",
            spec.relative_amplitude
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let values = trace
        .values()
        .iter()
        .map(|v| {
            let z: f64 = StandardNormal.sample(&mut rng);
            // power-like quantities stay nonnegative
            (v * (1.0 + spec.relative_amplitude * z)).max(0.0)
        })
        .collect();
    let mut noisy = trace.with_values(values)?;
    noisy.set_meta("noise_relative_amplitude", format!("{:e}", spec.relative_amplitude));
    noisy.set_meta("noise_seed", spec.seed);
    Ok(noisy)
}
