//! Noise sources and Gaussian sampling.
//!
//! Every source is ChaCha20. The secure source is keyed from the operating
//! system and is the only one suitable for a real release. Seeded sources are
//! reproducible and exist for tests and experiments; their output is
//! predictable and therefore **not private**.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::privacy::NoiseScale;

#[derive(Debug, Clone)]
pub struct NoiseSource {
    rng: ChaCha20Rng,
    deterministic: bool,
}

impl NoiseSource {
    /// OS-keyed cryptographically secure source.
    pub fn secure() -> Self {
        Self {
            rng: ChaCha20Rng::from_os_rng(),
            deterministic: false,
        }
    }

    /// Reproducible source. Non-private.
    pub fn seeded(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
            deterministic: true,
        }
    }

    /// Independent reproducible stream number `trial` under `master_seed`.
    ///
    /// Splitting rule: the ChaCha20 key comes from `master_seed` and the
    /// 64-bit ChaCha stream id is `trial`, so trials never share keystream.
    pub fn for_trial(master_seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
        rng.set_stream(trial);
        Self {
            rng,
            deterministic: true,
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Fills `out` with independent N(0, σ²) draws. A zero scale writes zeros
    /// without touching the generator.
    pub fn fill_gaussian(&mut self, scale: NoiseScale, out: &mut [f64]) {
        if scale.is_zero() {
            out.fill(0.0);
            return;
        }
        let sd = scale.std_dev();
        for v in out {
            *v = sd * self.standard_normal();
        }
    }
}

/// `dim` independent draws from N(0, σ²).
pub fn sample_noise(scale: NoiseScale, dim: usize, rng: &mut NoiseSource) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    rng.fill_gaussian(scale, &mut out);
    out
}
