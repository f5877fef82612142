//! Carry-less binary arithmetic coder with 16-bit probabilities.

/// Probability that the next bit is 1, scaled to `1..=65535`.
pub type Prob = u32;

pub struct Encoder {
    x1: u32,
    x2: u32,
    out: Vec<u8>,
}

impl Default for Encoder {
    fn default() -> Self {
        Encoder { x1: 0, x2: u32::MAX, out: Vec::new() }
    }
}

#[inline]
fn split(x1: u32, x2: u32, p1: Prob) -> u32 {
    x1 + (((x2 - x1) as u64 * p1 as u64) >> 16) as u32
}

impl Encoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn encode(&mut self, bit: bool, p1: Prob) {
        let xmid = split(self.x1, self.x2, p1);
        if bit {
            self.x2 = xmid;
        } else {
            self.x1 = xmid + 1;
        }
        while (self.x1 ^ self.x2) & 0xff00_0000 == 0 {
            self.out.push((self.x2 >> 24) as u8);
            self.x1 <<= 8;
            self.x2 = (self.x2 << 8) | 0xff;
        }
    }

    /// Bytes the finished stream will occupy.
    pub fn len_bytes(&self) -> usize {
        self.out.len() + 1
    }

    pub fn finish(mut self) -> Vec<u8> {
        self.out.push((self.x1 >> 24) as u8);
        self.out
    }
}

/// Decoder over a byte source; reads past the end as `0xff`.
pub struct Decoder<F: FnMut() -> Option<u8>> {
    x1: u32,
    x2: u32,
    x: u32,
    next: F,
}

impl<F: FnMut() -> Option<u8>> Decoder<F> {
    pub fn new(mut next: F) -> Self {
        let mut x = 0;
        for _ in 0..4 {
            x = (x << 8) | next().unwrap_or(0xff) as u32;
        }
        Decoder { x1: 0, x2: u32::MAX, x, next }
    }

    pub fn decode(&mut self, p1: Prob) -> bool {
        let xmid = split(self.x1, self.x2, p1);
        let bit = self.x <= xmid;
        if bit {
            self.x2 = xmid;
        } else {
            self.x1 = xmid + 1;
        }
        while (self.x1 ^ self.x2) & 0xff00_0000 == 0 {
            self.x1 <<= 8;
            self.x2 = (self.x2 << 8) | 0xff;
            self.x = (self.x << 8) | (self.next)().unwrap_or(0xff) as u32;
        }
        bit
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn round_trip_with_skewed_probabilities() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(3);
        let items: Vec<(bool, Prob)> = (0..20_000)
            .map(|_| {
                let p = rng.random_range(1..=65535u32);
                (rng.random_range(0..65536u32) < p, p)
            })
            .collect();
        let mut enc = Encoder::new();
        for &(b, p) in &items {
            enc.encode(b, p);
        }
        let bytes = enc.finish();
        let mut it = bytes.iter().copied();
        let mut dec = Decoder::new(|| it.next());
        for &(b, p) in &items {
            assert_eq!(dec.decode(p), b);
        }
    }

    #[test]
    fn near_certain_bits_are_cheap() {
        let mut enc = Encoder::new();
        for _ in 0..100_000 {
            enc.encode(true, 65535);
        }
        assert!(enc.len_bytes() < 8);
    }
}
