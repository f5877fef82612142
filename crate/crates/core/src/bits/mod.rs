//! Packed bit strings and the small amount of algebra every other module
//! needs: concatenation, slicing, position masks and element-wise logic.

mod io;
mod seed;
mod symbols;

pub use io::{read_bitstring, write_bitstring, BitFormat};
pub use seed::{sample_biased, sample_incompressible, Seed};
pub use symbols::SymbolString;

use std::fmt;

use crate::error::{Error, Result};

/// A finite binary string, packed 64 bits per word.
///
/// Bit `i` lives in word `i / 64` at bit position `i % 64`. Bits past `len`
/// in the last word are always zero.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BitOp {
    Xor,
    And,
    Not,
    Eq,
}

fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString { words: vec![0; words_for(len)], len }
    }

    pub fn ones(len: usize) -> Self {
        let mut s = BitString { words: vec![u64::MAX; words_for(len)], len };
        s.mask_tail();
        s
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut s = Self::zeros(len);
        for i in 0..len {
            if f(i) {
                s.words[i / 64] |= 1 << (i % 64);
            }
        }
        s
    }

    /// Builds from raw words; bits past `len` are cleared.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.resize(words_for(len), 0);
        let mut s = BitString { words, len };
        s.mask_tail();
        s
    }

    /// Parses an ASCII `0`/`1` string. Any other character is rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Self::zeros(text.len());
        for (i, c) in text.bytes().enumerate() {
            match c {
                b'0' => {}
                b'1' => s.words[i / 64] |= 1 << (i % 64),
                other => {
                    return Err(Error::MalformedFile(format!(
                        "byte {other:#04x} at offset {i} is not '0' or '1'"
                    )))
                }
            }
        }
        Ok(s)
    }

    fn mask_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Panics if `i >= len`.
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub(crate) fn set(&mut self, i: usize, v: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let m = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    pub(crate) fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    /// The 64 bits starting at `pos` (bit `j` of the result is bit `pos + j`);
    /// positions at or past `len` read as zero.
    #[inline]
    pub fn word_at(&self, pos: usize) -> u64 {
        let w = pos / 64;
        let off = pos % 64;
        let lo = self.words.get(w).copied().unwrap_or(0);
        if off == 0 {
            return lo;
        }
        let hi = self.words.get(w + 1).copied().unwrap_or(0);
        (lo >> off) | (hi << (64 - off))
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| (self.words[i / 64] >> (i % 64)) & 1 == 1)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Appends `other` in place.
    pub fn extend(&mut self, other: &BitString) {
        let off = self.len % 64;
        if off == 0 {
            self.words.extend_from_slice(&other.words);
        } else {
            for &w in &other.words {
                let last = self.words.len() - 1;
                self.words[last] |= w << off;
                self.words.push(w >> (64 - off));
            }
        }
        self.len += other.len;
        self.words.truncate(words_for(self.len));
        self.mask_tail();
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.extend(other);
        out
    }

    pub fn concat_all<'a>(parts: impl IntoIterator<Item = &'a BitString>) -> BitString {
        let mut out = BitString::default();
        for p in parts {
            out.extend(p);
        }
        out
    }

    /// Bits `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> BitString {
        assert!(start <= end && end <= self.len, "slice {start}..{end} of {}", self.len);
        let len = end - start;
        let words = (0..words_for(len)).map(|k| self.word_at(start + 64 * k)).collect();
        BitString::from_words(words, len)
    }

    pub fn prefix(&self, n: usize) -> BitString {
        self.slice(0, n.min(self.len))
    }

    /// The bits at `positions`, in the given order.
    pub fn select(&self, positions: &[usize]) -> Result<BitString> {
        let mut out = BitString::zeros(positions.len());
        for (k, &p) in positions.iter().enumerate() {
            if p >= self.len {
                return Err(Error::MaskOutOfRange { index: p, len: self.len });
            }
            if self.get(p) {
                out.words[k / 64] |= 1 << (k % 64);
            }
        }
        Ok(out)
    }

    /// Positions holding a one.
    pub fn ones_positions(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.count_ones());
        for (w, &word) in self.words.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                out.push(w * 64 + bits.trailing_zeros() as usize);
                bits &= bits - 1;
            }
        }
        out
    }

    /// Cyclic rotation: bit `i` of the result is bit `(i + k) mod len`.
    pub fn rotate_left(&self, k: usize) -> BitString {
        if self.len == 0 {
            return self.clone();
        }
        let k = k % self.len;
        self.slice(k, self.len).concat(&self.slice(0, k))
    }

    pub fn not(&self) -> BitString {
        let mut out = BitString { words: self.words.iter().map(|w| !w).collect(), len: self.len };
        out.mask_tail();
        out
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        self.zip_words(other, |a, b| a ^ b)
    }

    pub fn and(&self, other: &BitString) -> Result<BitString> {
        self.zip_words(other, |a, b| a & b)
    }

    fn zip_words(&self, other: &BitString, f: impl Fn(u64, u64) -> u64) -> Result<BitString> {
        if self.len != other.len {
            return Err(Error::LengthMismatch { left: self.len, right: other.len });
        }
        let words = self.words.iter().zip(&other.words).map(|(&a, &b)| f(a, b)).collect();
        Ok(BitString::from_words(words, self.len))
    }

    /// ASCII `0`/`1` rendering.
    pub fn to_ascii(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }
}

/// Position-wise logic. `Not` ignores `b`; the binary kinds require it.
pub fn elementwise(op: BitOp, a: &BitString, b: Option<&BitString>) -> Result<BitString> {
    if op == BitOp::Not {
        return Ok(a.not());
    }
    let b = b.ok_or_else(|| Error::InvalidArgument(format!("{op:?} needs two operands")))?;
    match op {
        BitOp::Xor => a.xor(b),
        BitOp::And => a.and(b),
        _ => a.zip_words(b, |x, y| !(x ^ y)),
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 128 {
            write!(f, "BitString({})", self.to_ascii())
        } else {
            write!(f, "BitString(len={}, ones={})", self.len, self.count_ones())
        }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ascii())
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for b in iter {
            if len % 64 == 0 {
                words.push(0);
            }
            if b {
                *words.last_mut().unwrap() |= 1 << (len % 64);
            }
            len += 1;
        }
        BitString { words, len }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        BitString::parse(s).unwrap()
    }

    #[test]
    fn and_by_hand() {
        let out = elementwise(BitOp::And, &bs("1101"), Some(&bs("1011"))).unwrap();
        assert_eq!(out, bs("1001"));
    }

    #[test]
    fn xor_with_self_is_zero() {
        let s = sample_incompressible(1000, &Seed::from_u64(3));
        assert_eq!(elementwise(BitOp::Xor, &s, Some(&s)).unwrap(), BitString::zeros(1000));
    }

    #[test]
    fn eq_is_not_xor() {
        let a = bs("0011");
        let b = bs("0101");
        assert_eq!(elementwise(BitOp::Eq, &a, Some(&b)).unwrap(), bs("1001"));
    }

    #[test]
    fn binary_ops_reject_mismatched_lengths() {
        let err = elementwise(BitOp::Xor, &bs("01"), Some(&bs("011"))).unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { left: 2, right: 3 }));
        assert!(elementwise(BitOp::And, &bs("01"), None).is_err());
    }

    #[test]
    fn concat_lengths_add_across_word_boundaries() {
        let a = sample_incompressible(70, &Seed::from_u64(1));
        let b = sample_incompressible(131, &Seed::from_u64(2));
        let c = a.concat(&b);
        assert_eq!(c.len(), 201);
        assert_eq!(c.slice(0, 70), a);
        assert_eq!(c.slice(70, 201), b);
        assert_eq!(c.to_ascii(), format!("{a}{b}"));
    }

    #[test]
    fn word_at_reads_unaligned_and_zero_pads() {
        let s = bs("1011");
        assert_eq!(s.word_at(0), 0b1101);
        assert_eq!(s.word_at(1), 0b110);
        assert_eq!(s.word_at(4), 0);
        assert_eq!(s.word_at(1000), 0);
    }

    #[test]
    fn select_and_ones_positions() {
        let s = bs("0110010");
        assert_eq!(s.ones_positions(), vec![1, 2, 5]);
        assert_eq!(s.select(&[0, 2, 5]).unwrap(), bs("011"));
        assert!(matches!(s.select(&[7]), Err(Error::MaskOutOfRange { index: 7, len: 7 })));
    }

    #[test]
    fn rotation_and_not_keep_tail_clean() {
        let s = bs("10011");
        assert_eq!(s.rotate_left(2), bs("01110"));
        assert_eq!(s.not(), bs("01100"));
        assert_eq!(s.not().count_ones(), 2);
    }

    #[test]
    fn parse_rejects_other_bytes() {
        assert!(matches!(BitString::parse("012"), Err(Error::MalformedFile(_))));
    }

    proptest::proptest! {
        #[test]
        fn double_negation_is_identity(bits in proptest::collection::vec(proptest::bool::ANY, 0..300)) {
            let s: BitString = bits.into_iter().collect();
            proptest::prop_assert_eq!(s.not().not(), s);
        }

        #[test]
        fn slice_of_concat_recovers_parts(
            a in proptest::collection::vec(proptest::bool::ANY, 0..200),
            b in proptest::collection::vec(proptest::bool::ANY, 0..200),
        ) {
            let a: BitString = a.into_iter().collect();
            let b: BitString = b.into_iter().collect();
            let c = a.concat(&b);
            proptest::prop_assert_eq!(c.len(), a.len() + b.len());
            proptest::prop_assert_eq!(c.slice(a.len(), c.len()), b);
            proptest::prop_assert_eq!(c.prefix(a.len()), a);
        }
    }
}
