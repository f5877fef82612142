//! Bit-oriented LZ77.
//!
//! After the segment table the stream is a sequence of tokens:
//!
//! ```text
//! 0 gamma(run) <run raw bits>                        literal run
//! 1 inv <distance - 1: w bits> gamma(len - MIN + 1)  back-reference
//! ```
//!
//! `w` is the bit width of `min(pos, window) - 1`, where `pos` counts every
//! bit already known to the decoder (helper bits included). A back-reference
//! copies `len` bits starting `distance` bits back, complemented when `inv`
//! is set; source and destination may overlap.

use crate::bits::BitString;
use crate::error::Result;

use super::bitio::{gamma_len, BitReader, BitWriter};
use super::{corrupt, read_segment_table, split_segments, truncated, write_segment_table, Codec, Compressor};

const KEY_BITS: usize = 32;
const RESTART_PENALTY: u64 = 16;

#[derive(Clone, Debug)]
pub struct Lz77 {
    pub window: usize,
    pub min_match: usize,
    pub max_chain: usize,
}

impl Default for Lz77 {
    fn default() -> Self {
        Lz77 { window: 1 << 22, min_match: KEY_BITS, max_chain: 32 }
    }
}

enum Token {
    Literal { start: usize, len: usize },
    Match { inv: bool, dist: usize, len: usize, pos: usize },
}

fn distance_width(pos: usize, window: usize) -> u32 {
    let avail = pos.min(window) as u64;
    64 - (avail - 1).leading_zeros()
}

struct Chains {
    head: Vec<u32>,
    prev: Vec<u32>,
    shift: u32,
}

impl Chains {
    fn new(total: usize) -> Self {
        let bits = (total.max(2).next_power_of_two().trailing_zeros()).clamp(8, 20);
        Chains { head: vec![0; 1 << bits], prev: vec![0; total], shift: 32 - bits }
    }

    #[inline]
    fn slot(&self, key: u32) -> usize {
        (key.wrapping_mul(0x9E37_79B1) >> self.shift) as usize
    }

    #[inline]
    fn insert(&mut self, key: u32, pos: usize) {
        let h = self.slot(key);
        self.prev[pos] = self.head[h];
        self.head[h] = pos as u32 + 1;
    }
}

#[inline]
fn match_len(s: &BitString, src: usize, dst: usize, inv: bool, limit: usize) -> usize {
    let flip = if inv { u64::MAX } else { 0 };
    let mut l = 0;
    while l < limit {
        let diff = s.word_at(src + l) ^ s.word_at(dst + l) ^ flip;
        if diff != 0 {
            l += diff.trailing_zeros() as usize;
            break;
        }
        l += 64;
    }
    l.min(limit)
}

impl Lz77 {
    fn match_cost(&self, pos: usize, len: usize) -> u64 {
        2 + distance_width(pos, self.window) as u64 + gamma_len((len - self.min_match + 1) as u64) as u64
    }

    fn parse(&self, full: &BitString, start: usize) -> Vec<Token> {
        let total = full.len();
        let mut tokens = Vec::new();
        let mut chains = Chains::new(total);
        let key = |p: usize| full.word_at(p) as u32;
        let keyed = |p: usize| p + KEY_BITS <= total;

        for p in 0..start.min(total) {
            if keyed(p) {
                chains.insert(key(p), p);
            }
        }

        let mut pos = start;
        let mut lit_start = start;
        while pos < total {
            let mut best: Option<(usize, usize, bool)> = None;
            if keyed(pos) && pos + self.min_match <= total {
                let k = key(pos);
                let limit = total - pos;
                for (probe, inv) in [(k, false), (!k, true)] {
                    let mut cand = chains.head[chains.slot(probe)];
                    let mut steps = 0;
                    while cand != 0 && steps < self.max_chain {
                        let q = cand as usize - 1;
                        if pos - q > self.window {
                            break;
                        }
                        let l = match_len(full, q, pos, inv, limit);
                        if l >= self.min_match && best.is_none_or(|(bl, _, _)| l > bl) {
                            best = Some((l, pos - q, inv));
                            if l == limit {
                                break;
                            }
                        }
                        cand = chains.prev[q];
                        steps += 1;
                    }
                }
            }
            match best {
                Some((len, dist, inv)) if len as u64 > self.match_cost(pos, len) + RESTART_PENALTY => {
                    if pos > lit_start {
                        tokens.push(Token::Literal { start: lit_start, len: pos - lit_start });
                    }
                    tokens.push(Token::Match { inv, dist, len, pos });
                    for p in pos..pos + len {
                        if keyed(p) {
                            chains.insert(key(p), p);
                        }
                    }
                    pos += len;
                    lit_start = pos;
                }
                _ => {
                    if keyed(pos) {
                        chains.insert(key(pos), pos);
                    }
                    pos += 1;
                }
            }
        }
        if total > lit_start {
            tokens.push(Token::Literal { start: lit_start, len: total - lit_start });
        }
        tokens
    }

    fn token_bits(&self, tokens: &[Token]) -> u64 {
        tokens
            .iter()
            .map(|t| match *t {
                Token::Literal { len, .. } => 1 + gamma_len(len as u64) as u64 + len as u64,
                Token::Match { len, pos, .. } => self.match_cost(pos, len),
            })
            .sum()
    }
}

fn join(helper: &[&BitString], payload: &[&BitString]) -> (BitString, usize) {
    let h = BitString::concat_all(helper.iter().copied());
    let start = h.len();
    let mut full = h;
    for p in payload {
        full.extend(p);
    }
    (full, start)
}

impl Compressor for Lz77 {
    fn id(&self) -> &str {
        "lz77"
    }

    fn compressed_bits(&self, helper: &[&BitString], payload: &[&BitString]) -> u64 {
        let (full, start) = join(helper, payload);
        super::segment_table_bits(payload) + self.token_bits(&self.parse(&full, start))
    }
}

impl Codec for Lz77 {
    fn encode(&self, helper: &[&BitString], payload: &[&BitString]) -> BitString {
        let (full, start) = join(helper, payload);
        let mut w = BitWriter::new();
        write_segment_table(&mut w, payload);
        for t in self.parse(&full, start) {
            match t {
                Token::Literal { start, len } => {
                    w.push(false);
                    w.push_gamma(len as u64);
                    w.push_slice(&full, start, len);
                }
                Token::Match { inv, dist, len, pos } => {
                    w.push(true);
                    w.push(inv);
                    w.push_bits(dist as u64 - 1, distance_width(pos, self.window));
                    w.push_gamma((len - self.min_match + 1) as u64);
                }
            }
        }
        w.finish()
    }

    fn decode(&self, helper: &[&BitString], total_len: usize, stream: &BitString) -> Result<Vec<BitString>> {
        let mut r = BitReader::new(stream);
        let lens = read_segment_table(&mut r, total_len)?;
        let mut out = BitWriter::new();
        for h in helper {
            out.push_slice(h, 0, h.len());
        }
        let start = out.len();
        let end = start + total_len;
        while out.len() < end {
            if !r.bit().map_err(truncated)? {
                let run = r.gamma().map_err(truncated)? as usize;
                if out.len() + run > end {
                    return Err(corrupt("literal run past end"));
                }
                let bits = r.slice(run).map_err(truncated)?;
                out.push_slice(&bits, 0, run);
            } else {
                let inv = r.bit().map_err(truncated)?;
                let pos = out.len();
                let dist = r.bits(distance_width(pos, self.window)).map_err(truncated)? as usize + 1;
                let len = r.gamma().map_err(truncated)? as usize + self.min_match - 1;
                if dist > pos || pos + len > end {
                    return Err(corrupt("back-reference out of range"));
                }
                for k in 0..len {
                    let b = out.get(pos - dist + k);
                    out.push(b ^ inv);
                }
            }
        }
        let joined = out.finish().slice(start, end);
        Ok(split_segments(&joined, &lens))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::{sample_incompressible, Seed};

    fn round_trip(s: &BitString) -> u64 {
        let lz = Lz77::default();
        let enc = lz.encode(&[], &[s]);
        assert_eq!(enc.len() as u64, lz.compressed_bits(&[], &[s]));
        assert_eq!(lz.decode(&[], s.len(), &enc).unwrap(), vec![s.clone()]);
        enc.len() as u64
    }

    #[test]
    fn constant_and_periodic_strings_collapse() {
        assert!(round_trip(&BitString::zeros(100_000)) < 80);
        let alt = BitString::from_fn(100_000, |i| i % 2 == 1);
        assert!(round_trip(&alt) < 80);
        let period7 = BitString::from_fn(50_000, |i| i % 7 < 3);
        assert!(round_trip(&period7) < 120);
    }

    #[test]
    fn random_expands_by_a_few_bits_only() {
        let s = sample_incompressible(100_000, &Seed::from_u64(4));
        let bits = round_trip(&s);
        assert!(bits >= 100_000 && bits < 100_000 + 64, "{bits}");
    }

    #[test]
    fn complemented_copy_is_found() {
        let s = sample_incompressible(20_000, &Seed::from_u64(5));
        let t = s.concat(&s.not());
        assert!(round_trip(&t) < 20_000 + 120);
    }

    #[test]
    fn helper_primes_the_dictionary() {
        let lz = Lz77::default();
        let s = sample_incompressible(30_000, &Seed::from_u64(6));
        let bits = lz.compressed_bits(&[&s], &[&s]);
        assert!(bits < 80, "{bits}");
        let enc = lz.encode(&[&s], &[&s]);
        assert_eq!(lz.decode(&[&s], s.len(), &enc).unwrap(), vec![s]);
    }

    #[test]
    fn far_copies_beyond_64k_bits() {
        let s = sample_incompressible(200_000, &Seed::from_u64(8));
        let t = s.concat(&s);
        assert!(round_trip(&t) < 200_000 + 120);
    }

    #[test]
    fn truncated_stream_errors() {
        let lz = Lz77::default();
        let s = sample_incompressible(500, &Seed::from_u64(9));
        let enc = lz.encode(&[], &[&s]);
        assert!(lz.decode(&[], s.len(), &enc.prefix(enc.len() - 10)).is_err());
    }
}
