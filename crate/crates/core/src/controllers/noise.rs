use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Counter-addressed Gaussian noise.
///
/// Generator: ChaCha8 seeded with `ChaCha8Rng::seed_from_u64(seed)`. Frame
/// `t` reads the two 64-bit words at word position `4 t` and turns them into
/// uniforms `u1 = 1 - (w1 >> 11) 2^-53` in `(0, 1]` and
/// `u2 = (w2 >> 11) 2^-53` in `[0, 1)`, then applies Box-Muller:
/// `r = sqrt(-2 ln u1)`, `(r cos 2 pi u2, r sin 2 pi u2)`.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl NoiseStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Two independent standard normal draws for counter `t`.
    pub fn normal_pair(&self, t: u64) -> (f64, f64) {
        let mut rng = self.rng.clone();
        rng.set_word_pos(4 * t as u128);
        let scale = 1.0 / (1u64 << 53) as f64;
        let u1 = 1.0 - (rng.next_u64() >> 11) as f64 * scale;
        let u2 = (rng.next_u64() >> 11) as f64 * scale;
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        (r * c, r * s)
    }
}

/// Stable 64-bit seed derived from a base seed and a list of labels.
pub fn derive_seed(base: u64, labels: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    for l in labels {
        h.update((l.len() as u64).to_le_bytes());
        h.update(l.as_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}
