use std::fmt;

use crate::error::{Error, Result};

use super::BitString;

/// A string over the alphabet `{1, ..., m}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SymbolString {
    symbols: Vec<u32>,
    m: u32,
}

impl SymbolString {
    pub fn new(symbols: Vec<u32>, m: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidArgument(format!("alphabet size {m} < 2")));
        }
        if let Some((i, &s)) = symbols.iter().enumerate().find(|(_, &s)| s == 0 || s > m) {
            return Err(Error::InvalidArgument(format!("symbol {s} at {i} outside 1..={m}")));
        }
        Ok(SymbolString { symbols, m })
    }

    pub fn alphabet(&self) -> u32 {
        self.m
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn get(&self, i: usize) -> u32 {
        self.symbols[i]
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    /// Positions where the symbol equals `v`, as an indicator string.
    pub fn indicator(&self, v: u32) -> BitString {
        BitString::from_fn(self.len(), |i| self.symbols[i] == v)
    }

    /// Fixed-width binary encoding of `symbol - 1`, `ceil(log2 m)` bits per
    /// symbol, least significant bit first.
    pub fn to_bits(&self) -> BitString {
        let width = (32 - (self.m - 1).leading_zeros()) as usize;
        BitString::from_fn(self.len() * width, |i| ((self.symbols[i / width] - 1) >> (i % width)) & 1 == 1)
    }

    /// Bit planes of `symbol - 1`, least significant plane first; each plane
    /// is aligned with the symbol positions.
    pub fn planes(&self) -> Vec<BitString> {
        let width = 32 - (self.m - 1).leading_zeros();
        (0..width).map(|k| BitString::from_fn(self.len(), |i| ((self.symbols[i] - 1) >> k) & 1 == 1)).collect()
    }

    /// Parses decimal symbols separated by single spaces.
    pub fn parse(text: &str, m: u32) -> Result<Self> {
        let text = text.trim_end_matches(['\n', '\r']);
        if text.is_empty() {
            return SymbolString::new(Vec::new(), m);
        }
        let symbols = text
            .split(' ')
            .map(|t| t.parse::<u32>().map_err(|_| Error::MalformedFile(format!("bad symbol {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        SymbolString::new(symbols, m).map_err(|e| Error::MalformedFile(e.to_string()))
    }
}

impl fmt::Display for SymbolString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.symbols.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for SymbolString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymbolString(m={}, len={})", self.m, self.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_alphabet() {
        assert!(SymbolString::new(vec![1, 2, 3], 3).is_ok());
        assert!(SymbolString::new(vec![0], 3).is_err());
        assert!(SymbolString::new(vec![4], 3).is_err());
        assert!(SymbolString::new(vec![1], 1).is_err());
    }

    #[test]
    fn serializes_with_single_spaces_and_multi_digit_symbols() {
        let s = SymbolString::new(vec![1, 12, 3], 12).unwrap();
        assert_eq!(s.to_string(), "1 12 3");
        assert_eq!(SymbolString::parse("1 12 3\n", 12).unwrap(), s);
        assert!(SymbolString::parse("1  2", 12).is_err());
    }

    #[test]
    fn to_bits_width() {
        let s = SymbolString::new(vec![1, 8, 5], 8).unwrap();
        assert_eq!(s.to_bits().to_ascii(), "000111001");
    }
}
