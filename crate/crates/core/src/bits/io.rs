use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

use super::BitString;

/// On-disk bit string encodings.
///
/// * `Ascii01`: one byte per bit (`'0'`/`'1'`), followed by a single `'\n'`
///   on write; a trailing newline is optional on read.
/// * `Packed`: 8-byte little-endian bit length, then `ceil(len / 8)` payload
///   bytes. Bit `i` is stored in byte `i / 8` at mask `0x80 >> (i % 8)`;
///   unused low bits of the final byte are zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BitFormat {
    Ascii01,
    Packed,
}

impl BitFormat {
    pub fn encode(self, s: &BitString) -> Vec<u8> {
        match self {
            BitFormat::Ascii01 => {
                let mut out = s.to_ascii().into_bytes();
                out.push(b'\n');
                out
            }
            BitFormat::Packed => {
                let mut out = Vec::with_capacity(8 + s.len().div_ceil(8));
                out.extend_from_slice(&(s.len() as u64).to_le_bytes());
                let mut payload = vec![0u8; s.len().div_ceil(8)];
                for i in s.ones_positions() {
                    payload[i / 8] |= 0x80 >> (i % 8);
                }
                out.extend_from_slice(&payload);
                out
            }
        }
    }

    pub fn decode(self, bytes: &[u8]) -> Result<BitString> {
        match self {
            BitFormat::Ascii01 => {
                let body = bytes.strip_suffix(b"\n").unwrap_or(bytes);
                let text = std::str::from_utf8(body)
                    .map_err(|_| Error::MalformedFile("ascii01 file is not valid text".into()))?;
                BitString::parse(text)
            }
            BitFormat::Packed => {
                let header: [u8; 8] = bytes
                    .get(..8)
                    .and_then(|h| h.try_into().ok())
                    .ok_or_else(|| Error::MalformedFile("packed file shorter than its 8-byte header".into()))?;
                let len = u64::from_le_bytes(header) as usize;
                let payload = &bytes[8..];
                let need = len.div_ceil(8);
                if payload.len() != need {
                    return Err(Error::MalformedFile(format!(
                        "packed payload has {} bytes, header announces {len} bits ({need} bytes)",
                        payload.len()
                    )));
                }
                Ok(BitString::from_fn(len, |i| payload[i / 8] & (0x80 >> (i % 8)) != 0))
            }
        }
    }
}

pub fn write_bitstring(path: impl AsRef<Path>, s: &BitString, format: BitFormat) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&format.encode(s))?;
    Ok(())
}

pub fn read_bitstring(path: impl AsRef<Path>, format: BitFormat) -> Result<BitString> {
    format.decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::{sample_incompressible, Seed};

    #[test]
    fn ascii_round_trip_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.txt");
        let s = BitString::parse("0110").unwrap();
        write_bitstring(&p, &s, BitFormat::Ascii01).unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"0110\n");
        assert_eq!(read_bitstring(&p, BitFormat::Ascii01).unwrap(), s);
    }

    #[test]
    fn packed_size_is_header_plus_ceil_bytes() {
        let s = BitString::parse("101100111000").unwrap();
        let bytes = BitFormat::Packed.encode(&s);
        assert_eq!(bytes.len(), 8 + 2);
        assert_eq!(&bytes[..8], &12u64.to_le_bytes());
        assert_eq!(&bytes[8..], &[0b1011_0011, 0b1000_0000]);
        assert_eq!(BitFormat::Packed.decode(&bytes).unwrap(), s);
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(matches!(BitFormat::Ascii01.decode(b"012"), Err(Error::MalformedFile(_))));
        let mut bytes = BitFormat::Packed.encode(&BitString::ones(12));
        bytes.pop();
        assert!(matches!(BitFormat::Packed.decode(&bytes), Err(Error::MalformedFile(_))));
        assert!(matches!(BitFormat::Packed.decode(&[1, 2, 3]), Err(Error::MalformedFile(_))));
    }

    #[test]
    fn large_round_trip_both_formats() {
        let s = sample_incompressible(1 << 20, &Seed::from_u64(11));
        for f in [BitFormat::Ascii01, BitFormat::Packed] {
            assert_eq!(f.decode(&f.encode(&s)).unwrap(), s);
        }
    }

    proptest::proptest! {
        #[test]
        fn round_trip_identity(bits in proptest::collection::vec(proptest::bool::ANY, 0..2000)) {
            let s: BitString = bits.into_iter().collect();
            for f in [BitFormat::Ascii01, BitFormat::Packed] {
                proptest::prop_assert_eq!(f.decode(&f.encode(&s)).unwrap(), s.clone());
            }
        }
    }
}
