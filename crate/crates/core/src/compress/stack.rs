//! Picks the shorter of the LZ77 and context-model streams, prefixed by one
//! selector bit (0 = LZ77, 1 = context model).

use crate::bits::BitString;
use crate::error::Result;

use super::bitio::BitWriter;
use super::{corrupt, Codec, Compressor, ContextModel, Lz77};

#[derive(Clone, Debug, Default)]
pub struct Stack {
    pub lz: Lz77,
    pub cm: ContextModel,
}

impl Stack {
    fn sizes(&self, helper: &[&BitString], payload: &[&BitString]) -> (u64, u64) {
        rayon::join(|| self.lz.compressed_bits(helper, payload), || self.cm.compressed_bits(helper, payload))
    }
}

impl Compressor for Stack {
    fn id(&self) -> &str {
        "stack"
    }

    fn compressed_bits(&self, helper: &[&BitString], payload: &[&BitString]) -> u64 {
        let (lz, cm) = self.sizes(helper, payload);
        1 + lz.min(cm)
    }
}

impl Codec for Stack {
    fn encode(&self, helper: &[&BitString], payload: &[&BitString]) -> BitString {
        let (lz, cm) = self.sizes(helper, payload);
        let use_cm = cm < lz;
        let inner = if use_cm { self.cm.encode(helper, payload) } else { self.lz.encode(helper, payload) };
        let mut w = BitWriter::new();
        w.push(use_cm);
        w.push_slice(&inner, 0, inner.len());
        w.finish()
    }

    fn decode(&self, helper: &[&BitString], total_len: usize, stream: &BitString) -> Result<Vec<BitString>> {
        if stream.is_empty() {
            return Err(corrupt("empty stream"));
        }
        let inner = stream.slice(1, stream.len());
        if stream.get(0) {
            self.cm.decode(helper, total_len, &inner)
        } else {
            self.lz.decode(helper, total_len, &inner)
        }
    }
}
