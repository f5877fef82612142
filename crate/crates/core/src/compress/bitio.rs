use crate::bits::BitString;

/// Append-only bit sink. Multi-bit fields are written most significant bit first.
#[derive(Default)]
pub struct BitWriter {
    words: Vec<u64>,
    len: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        if self.len % 64 == 0 {
            self.words.push(0);
        }
        if bit {
            *self.words.last_mut().unwrap() |= 1 << (self.len % 64);
        }
        self.len += 1;
    }

    pub fn push_bits(&mut self, value: u64, width: u32) {
        for k in (0..width).rev() {
            self.push((value >> k) & 1 == 1);
        }
    }

    /// Elias gamma code of `v >= 1`.
    pub fn push_gamma(&mut self, v: u64) {
        debug_assert!(v >= 1);
        let width = 64 - v.leading_zeros();
        for _ in 1..width {
            self.push(false);
        }
        self.push_bits(v, width);
    }

    /// Copies `len` bits of `src` starting at `start`.
    pub fn push_slice(&mut self, src: &BitString, start: usize, len: usize) {
        let mut done = 0;
        while done < len {
            let take = (len - done).min(64);
            let w = src.word_at(start + done);
            for k in 0..take {
                self.push((w >> k) & 1 == 1);
            }
            done += take;
        }
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn push_bytes(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.push_bits(b as u64, 8);
        }
    }

    pub fn finish(self) -> BitString {
        BitString::from_words(self.words, self.len)
    }
}

/// Length in bits of the Elias gamma code of `v >= 1`.
#[inline]
pub fn gamma_len(v: u64) -> u32 {
    2 * (64 - v.leading_zeros()) - 1
}

pub struct BitReader<'a> {
    src: &'a BitString,
    pos: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exhausted;

impl<'a> BitReader<'a> {
    pub fn new(src: &'a BitString) -> Self {
        BitReader { src, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.src.len() - self.pos
    }

    pub fn bit(&mut self) -> Result<bool, Exhausted> {
        if self.pos >= self.src.len() {
            return Err(Exhausted);
        }
        let b = self.src.get(self.pos);
        self.pos += 1;
        Ok(b)
    }

    pub fn bits(&mut self, width: u32) -> Result<u64, Exhausted> {
        let mut v = 0;
        for _ in 0..width {
            v = (v << 1) | self.bit()? as u64;
        }
        Ok(v)
    }

    pub fn gamma(&mut self) -> Result<u64, Exhausted> {
        let mut zeros = 0;
        while !self.bit()? {
            zeros += 1;
            if zeros > 63 {
                return Err(Exhausted);
            }
        }
        Ok((1 << zeros) | self.bits(zeros)?)
    }

    /// Reads `len` raw bits into a new string.
    pub fn slice(&mut self, len: usize) -> Result<BitString, Exhausted> {
        if self.remaining() < len {
            return Err(Exhausted);
        }
        let s = self.src.slice(self.pos, self.pos + len);
        self.pos += len;
        Ok(s)
    }
}
