//! Lossless bit-string compressors used as the computable stand-in for
//! Kolmogorov complexity.
//!
//! Every codec works on a list of *payload segments* that may be preceded by
//! *helper segments* known to both encoder and decoder. The token stream of
//! a codec starts with the payload segment table:
//!
//! ```text
//! gamma(k + 1)                       k = number of payload segments
//! gamma(len_j + 1)  for j < k - 1    the last length follows from the header
//! ```
//!
//! A container (see [`encode_container`]) is the 8-byte little-endian total
//! payload bit length followed by the token stream packed most significant
//! bit first into bytes, zero padded.

pub mod arith;
pub mod bitio;
mod cm;
mod lz;
mod stack;

pub use cm::ContextModel;
pub use lz::Lz77;
pub use stack::Stack;

use crate::bits::BitString;
use crate::error::{Error, Result};
use bitio::{BitReader, BitWriter};

/// Container header size in bits; estimates subtract it.
pub const CONTAINER_HEADER_BITS: u64 = 64;

/// A deterministic compressor reporting token-stream lengths in bits.
///
/// `helper` segments are side information available to the decoder; only the
/// `payload` is encoded. `(payload, helper) -> (stream, helper)` must be
/// injective.
pub trait Compressor: Send + Sync {
    fn id(&self) -> &str;

    fn compressed_bits(&self, helper: &[&BitString], payload: &[&BitString]) -> u64;
}

/// A compressor with an explicit inverse.
pub trait Codec: Compressor {
    fn encode(&self, helper: &[&BitString], payload: &[&BitString]) -> BitString;

    /// Inverts [`Codec::encode`] given the total payload length from the
    /// container header.
    fn decode(&self, helper: &[&BitString], total_len: usize, stream: &BitString) -> Result<Vec<BitString>>;
}

/// Looks up one of the built-in codecs by id: `stack`, `lz77` or `cm`.
pub fn builtin(id: &str) -> Option<Box<dyn Codec>> {
    match id {
        "stack" => Some(Box::new(Stack::default())),
        "lz77" => Some(Box::new(Lz77::default())),
        "cm" => Some(Box::new(ContextModel::default())),
        _ => None,
    }
}

pub(crate) fn write_segment_table(w: &mut BitWriter, payload: &[&BitString]) {
    w.push_gamma(payload.len() as u64 + 1);
    if let Some((_, init)) = payload.split_last() {
        for s in init {
            w.push_gamma(s.len() as u64 + 1);
        }
    }
}

pub(crate) fn segment_table_bits(payload: &[&BitString]) -> u64 {
    let mut bits = bitio::gamma_len(payload.len() as u64 + 1) as u64;
    if let Some((_, init)) = payload.split_last() {
        bits += init.iter().map(|s| bitio::gamma_len(s.len() as u64 + 1) as u64).sum::<u64>();
    }
    bits
}

pub(crate) fn read_segment_table(r: &mut BitReader<'_>, total_len: usize) -> Result<Vec<usize>> {
    let k = (r.gamma().map_err(truncated)? - 1) as usize;
    if k == 0 {
        return if total_len == 0 { Ok(Vec::new()) } else { Err(corrupt("no segments but nonzero length")) };
    }
    let mut lens = Vec::with_capacity(k);
    let mut used = 0usize;
    for _ in 0..k - 1 {
        let l = (r.gamma().map_err(truncated)? - 1) as usize;
        used = used.checked_add(l).filter(|&u| u <= total_len).ok_or_else(|| corrupt("segment lengths exceed total"))?;
        lens.push(l);
    }
    lens.push(total_len - used);
    Ok(lens)
}

pub(crate) fn truncated(_: bitio::Exhausted) -> Error {
    Error::MalformedFile("compressed stream ended early".into())
}

pub(crate) fn corrupt(msg: &str) -> Error {
    Error::MalformedFile(format!("corrupt compressed stream: {msg}"))
}

pub(crate) fn split_segments(joined: &BitString, lens: &[usize]) -> Vec<BitString> {
    let mut out = Vec::with_capacity(lens.len());
    let mut at = 0;
    for &l in lens {
        out.push(joined.slice(at, at + l));
        at += l;
    }
    out
}

/// Serializes `payload` into a self-describing container.
pub fn encode_container(codec: &dyn Codec, helper: &[&BitString], payload: &[&BitString]) -> Vec<u8> {
    let total: usize = payload.iter().map(|s| s.len()).sum();
    let stream = codec.encode(helper, payload);
    let mut out = (total as u64).to_le_bytes().to_vec();
    let mut bytes = vec![0u8; stream.len().div_ceil(8)];
    for i in stream.ones_positions() {
        bytes[i / 8] |= 0x80 >> (i % 8);
    }
    out.extend_from_slice(&bytes);
    out
}

pub fn decode_container(codec: &dyn Codec, helper: &[&BitString], bytes: &[u8]) -> Result<Vec<BitString>> {
    let header: [u8; 8] = bytes
        .get(..8)
        .and_then(|h| h.try_into().ok())
        .ok_or_else(|| Error::MalformedFile("container shorter than its header".into()))?;
    let total = u64::from_le_bytes(header) as usize;
    let body = &bytes[8..];
    let stream = BitString::from_fn(body.len() * 8, |i| body[i / 8] & (0x80 >> (i % 8)) != 0);
    codec.decode(helper, total, &stream)
}
