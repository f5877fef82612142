//! Context model: each payload segment is coded bit by
//! bit with an adaptive estimator whose context is the aligned bit of each
//! of the nearest preceding segments.
//!
//! The stream is the segment table followed by arithmetic-coded bytes.

use crate::bits::BitString;
use crate::error::Result;

use super::arith::{Decoder, Encoder, Prob};
use super::bitio::{BitReader, BitWriter};
use super::{corrupt, read_segment_table, segment_table_bits, split_segments, write_segment_table, Codec, Compressor};

#[derive(Clone, Debug)]
pub struct ContextModel {
    /// How many preceding segments feed the context.
    pub depth: usize,
    /// Counts are halved once their sum exceeds this.
    pub count_limit: u32,
}

impl Default for ContextModel {
    fn default() -> Self {
        ContextModel { depth: 4, count_limit: 1 << 16 }
    }
}

struct Model<'a> {
    prior: Vec<&'a BitString>,
    counts: Vec<[u32; 2]>,
    limit: u32,
}

impl<'a> Model<'a> {
    fn new(prior: Vec<&'a BitString>, limit: u32) -> Self {
        let size = 3usize.pow(prior.len() as u32);
        Model { prior, counts: vec![[0, 0]; size], limit }
    }

    #[inline]
    fn context(&self, i: usize) -> usize {
        self.prior.iter().fold(0, |acc, s| {
            let digit = if i >= s.len() { 2 } else { s.get(i) as usize };
            acc * 3 + digit
        })
    }

    #[inline]
    fn p1(&self, ctx: usize) -> Prob {
        let [c0, c1] = self.counts[ctx];
        let num = (2 * c1 as u64 + 1) << 16;
        let den = 2 * (c0 as u64 + c1 as u64) + 2;
        (num / den).clamp(1, 65535) as Prob
    }

    #[inline]
    fn update(&mut self, ctx: usize, bit: bool) {
        let c = &mut self.counts[ctx];
        c[bit as usize] += 1;
        if c[0] + c[1] > self.limit {
            c[0] /= 2;
            c[1] /= 2;
        }
    }
}

impl ContextModel {
    fn prior<'a>(&self, known: &[&'a BitString]) -> Vec<&'a BitString> {
        known[known.len().saturating_sub(self.depth)..].to_vec()
    }

    fn run(&self, helper: &[&BitString], payload: &[&BitString]) -> Encoder {
        let mut known: Vec<&BitString> = helper.to_vec();
        let mut enc = Encoder::new();
        for seg in payload {
            let mut m = Model::new(self.prior(&known), self.count_limit);
            for i in 0..seg.len() {
                let ctx = m.context(i);
                let bit = seg.get(i);
                enc.encode(bit, m.p1(ctx));
                m.update(ctx, bit);
            }
            known.push(seg);
        }
        enc
    }
}

impl Compressor for ContextModel {
    fn id(&self) -> &str {
        "cm"
    }

    fn compressed_bits(&self, helper: &[&BitString], payload: &[&BitString]) -> u64 {
        segment_table_bits(payload) + 8 * self.run(helper, payload).len_bytes() as u64
    }
}

impl Codec for ContextModel {
    fn encode(&self, helper: &[&BitString], payload: &[&BitString]) -> BitString {
        let mut w = BitWriter::new();
        write_segment_table(&mut w, payload);
        w.push_bytes(&self.run(helper, payload).finish());
        w.finish()
    }

    fn decode(&self, helper: &[&BitString], total_len: usize, stream: &BitString) -> Result<Vec<BitString>> {
        let mut r = BitReader::new(stream);
        let lens = read_segment_table(&mut r, total_len)?;
        let body_bits = r.remaining();
        if body_bits < 8 {
            return Err(corrupt("missing arithmetic-coded body"));
        }
        let mut dec = Decoder::new(|| if r.remaining() >= 8 { r.bits(8).ok().map(|b| b as u8) } else { None });
        let mut segments: Vec<BitString> = Vec::with_capacity(lens.len());
        for &len in &lens {
            let mut known: Vec<&BitString> = helper.to_vec();
            known.extend(segments.iter());
            let mut m = Model::new(self.prior(&known), self.count_limit);
            let mut out = BitWriter::new();
            for i in 0..len {
                let ctx = m.context(i);
                let bit = dec.decode(m.p1(ctx));
                m.update(ctx, bit);
                out.push(bit);
            }
            drop(m);
            segments.push(out.finish());
        }
        let joined = BitString::concat_all(segments.iter());
        Ok(split_segments(&joined, &lens))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::{sample_biased, sample_incompressible, Seed};

    fn check(helper: &[&BitString], payload: &[&BitString]) -> u64 {
        let cm = ContextModel::default();
        let enc = cm.encode(helper, payload);
        assert_eq!(enc.len() as u64, cm.compressed_bits(helper, payload));
        let total = payload.iter().map(|s| s.len()).sum();
        let back = cm.decode(helper, total, &enc).unwrap();
        assert_eq!(back.iter().collect::<Vec<_>>(), payload.to_vec());
        enc.len() as u64
    }

    #[test]
    fn biased_source_costs_near_entropy() {
        let s = sample_biased(50_000, 0.1, &Seed::from_u64(1));
        let bits = check(&[], &[&s]);
        // h(0.1) = 0.469
        assert!(bits < 24_000, "{bits}");
    }

    #[test]
    fn bitwise_function_of_earlier_segments_is_nearly_free() {
        let a = sample_incompressible(20_000, &Seed::from_u64(2));
        let b = sample_incompressible(20_000, &Seed::from_u64(3));
        let z = a.not().and(&b).unwrap();
        let with = check(&[], &[&a, &b, &z]);
        let without = check(&[], &[&a, &b]);
        assert!(with - without < 400, "{with} {without}");
    }

    #[test]
    fn uneven_segments_round_trip() {
        let a = sample_incompressible(1000, &Seed::from_u64(4));
        let b = BitString::zeros(3);
        let e = BitString::zeros(0);
        check(&[&a], &[&b, &e, &a, &b]);
        check(&[], &[]);
    }
}
