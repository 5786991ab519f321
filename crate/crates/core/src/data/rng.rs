use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

/// Deterministic random source addressed by a 64-bit seed and a stream label.
///
/// The generator is ChaCha12 keyed by `SHA-256(seed || stream)`, so an
/// identical `(seed, stream)` pair yields an identical draw sequence
/// everywhere. Sub-streams derived with [`SeededRng::substream`] depend only
/// on the seed and the label path, never on how many draws the parent has
/// made, which lets independent trials run in any order (or in parallel)
/// without changing their results.
#[derive(Clone, Debug)]
pub struct SeededRng {
    seed: u64,
    stream: String,
    chacha: ChaCha12Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, "root")
    }

    pub fn with_stream(seed: u64, stream: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(seed.to_le_bytes());
        hasher.update([0u8]);
        hasher.update(stream.as_bytes());
        let key: [u8; 32] = hasher.finalize().into();
        SeededRng {
            seed,
            stream: stream.to_string(),
            chacha: ChaCha12Rng::from_seed(key),
        }
    }

    /// Child stream addressed by `label`, independent of draws made so far.
    pub fn substream(&self, label: &str) -> SeededRng {
        Self::with_stream(self.seed, &format!("{}/{}", self.stream, label))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> &str {
        &self.stream
    }

    pub fn next_u64(&mut self) -> u64 {
        self.chacha.next_u64()
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in the open interval `(0, 1)`; safe under `ln`.
    pub fn open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Unbiased integer in `[0, n)` by rejection sampling.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index bound must be positive");
        let n = n as u64;
        let limit = u64::MAX - u64::MAX % n;
        loop {
            let x = self.next_u64();
            if x < limit {
                return (x % n) as usize;
            }
        }
    }

    /// Fair coin.
    pub fn coin(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }

    /// Pair of independent standard normal draws via the Box-Muller
    /// transform: `r = sqrt(-2 ln u1)`, `theta = 2 pi u2`, returning
    /// `(r cos theta, r sin theta)`.
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.open01();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        (r * theta.cos(), r * theta.sin())
    }

    /// Single standard normal draw (first half of a Box-Muller pair).
    pub fn normal(&mut self) -> f64 {
        self.normal_pair().0
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }
}
