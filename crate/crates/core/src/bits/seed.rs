use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use super::BitString;

/// 256-bit seed for the ChaCha20 keystream generator.
///
/// All pseudorandom data in the crate is the ChaCha20 keystream (20 rounds,
/// 64-bit block counter starting at 0, stream 0) keyed by this seed, read as
/// little-endian `u64` words. Child seeds are `SHA-256(seed || label)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed(pub [u8; 32]);

impl Seed {
    /// Little-endian `value` in the first eight bytes, zeros elsewhere.
    pub fn from_u64(value: u64) -> Self {
        let mut bytes = [0u8; 32];
        bytes[..8].copy_from_slice(&value.to_le_bytes());
        Seed(bytes)
    }

    pub fn derive(&self, label: &str) -> Seed {
        let mut h = Sha256::new();
        h.update(self.0);
        h.update(label.as_bytes());
        Seed(h.finalize().into())
    }

    pub fn rng(&self) -> ChaCha20Rng {
        ChaCha20Rng::from_seed(self.0)
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Debug for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Seed({})", self.to_hex())
    }
}

/// Seeded stand-in for an incompressible string: the first `n` keystream bits.
pub fn sample_incompressible(n: usize, seed: &Seed) -> BitString {
    let mut rng = seed.rng();
    let words = (0..n.div_ceil(64)).map(|_| rng.next_u64()).collect();
    BitString::from_words(words, n)
}

/// Independent bits that are one with probability `p` (53-bit uniform draws).
pub fn sample_biased(n: usize, p: f64, seed: &Seed) -> BitString {
    let mut rng = seed.rng();
    BitString::from_fn(n, |_| ((rng.next_u64() >> 11) as f64) * (1.0 / (1u64 << 53) as f64) < p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_deterministic() {
        let s = Seed::from_u64(0);
        assert_eq!(sample_incompressible(8, &s), sample_incompressible(8, &s));
        assert_eq!(sample_incompressible(1000, &s), sample_incompressible(1000, &s));
        assert_ne!(sample_incompressible(1000, &s), sample_incompressible(1000, &Seed::from_u64(1)));
    }

    #[test]
    fn prefix_consistency_across_lengths() {
        let s = Seed::from_u64(7);
        let long = sample_incompressible(500, &s);
        assert_eq!(sample_incompressible(130, &s), long.prefix(130));
    }

    #[test]
    fn keystream_matches_chacha20_zero_key_vector() {
        // RFC 7539 appendix A.1 test vector 1: key 0, nonce 0, counter 0.
        let bits = sample_incompressible(64, &Seed([0; 32]));
        assert_eq!(bits.words()[0], u64::from_le_bytes([0x76, 0xb8, 0xe0, 0xad, 0xa0, 0xf1, 0x3d, 0x90]));
    }

    #[test]
    fn derived_seeds_differ_by_label() {
        let s = Seed::from_u64(5);
        assert_ne!(s.derive("a"), s.derive("b"));
        assert_eq!(s.derive("a"), s.derive("a"));
    }

    #[test]
    fn biased_sampler_hits_its_rate() {
        let s = sample_biased(100_000, 0.25, &Seed::from_u64(9));
        let frac = s.count_ones() as f64 / 1e5;
        assert!((frac - 0.25).abs() < 0.01, "{frac}");
    }
}
