//! Two-party input/output quadruples `(a, b, x, y)` and the tests run on them.

mod games;
mod gen;

pub use games::{magic_square_value, magic_wins, pr_parallel_value, pr_parallel_wins, MagicValue, ParallelValue};
pub use gen::{
    bundled_local_strategies, chained_indicator, gen_chained, gen_magic_square, gen_pr, uniform_symbols, LocalStrategy,
    MagicStrategy, PrStrategy,
};

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bits::{BitString, Seed, SymbolString};
use crate::complexity::{estimate_k_cond, estimate_k_joint, ComplexityEstimate, Thresholds, Verdict};
use crate::compress::Compressor;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Pr,
    Chained,
    MagicSquare,
}

/// One of the four strings of a quadruple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Strand {
    Bits(BitString),
    Symbols(SymbolString),
}

impl Strand {
    pub fn len(&self) -> usize {
        match self {
            Strand::Bits(b) => b.len(),
            Strand::Symbols(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Position-aligned binary parts: the string itself, or the bit planes of
    /// a symbol string.
    pub fn parts(&self) -> Vec<BitString> {
        match self {
            Strand::Bits(b) => vec![b.clone()],
            Strand::Symbols(s) => s.planes(),
        }
    }

    /// Single binary string used when the strand is the subject of an estimate.
    pub fn flat(&self) -> BitString {
        BitString::concat_all(self.parts().iter())
    }

    pub fn bits(&self) -> Option<&BitString> {
        match self {
            Strand::Bits(b) => Some(b),
            Strand::Symbols(_) => None,
        }
    }

    pub fn symbols(&self) -> Option<&SymbolString> {
        match self {
            Strand::Symbols(s) => Some(s),
            Strand::Bits(_) => None,
        }
    }
}

impl fmt::Display for Strand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strand::Bits(b) => write!(f, "{b}"),
            Strand::Symbols(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadrupleHeader {
    pub kind: SystemKind,
    pub m: Option<u32>,
    pub n: usize,
    pub seed: Option<String>,
    pub strategy: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Quadruple {
    pub kind: SystemKind,
    pub a: Strand,
    pub b: Strand,
    pub x: Strand,
    pub y: Strand,
    pub seed: Option<Seed>,
    pub strategy: String,
}

impl Quadruple {
    pub fn pr(a: BitString, b: BitString, x: BitString, y: BitString) -> Result<Self> {
        let q = Quadruple {
            kind: SystemKind::Pr,
            a: Strand::Bits(a),
            b: Strand::Bits(b),
            x: Strand::Bits(x),
            y: Strand::Bits(y),
            seed: None,
            strategy: "given".into(),
        };
        q.validate()?;
        Ok(q)
    }

    pub fn chained(a: SymbolString, b: SymbolString, x: BitString, y: BitString) -> Result<Self> {
        let q = Quadruple {
            kind: SystemKind::Chained,
            a: Strand::Symbols(a),
            b: Strand::Symbols(b),
            x: Strand::Bits(x),
            y: Strand::Bits(y),
            seed: None,
            strategy: "given".into(),
        };
        q.validate()?;
        Ok(q)
    }

    pub fn magic_square(a: SymbolString, b: SymbolString, x: SymbolString, y: SymbolString) -> Result<Self> {
        let q = Quadruple {
            kind: SystemKind::MagicSquare,
            a: Strand::Symbols(a),
            b: Strand::Symbols(b),
            x: Strand::Symbols(x),
            y: Strand::Symbols(y),
            seed: None,
            strategy: "given".into(),
        };
        q.validate()?;
        Ok(q)
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Alphabet size of the inputs for symbol kinds.
    pub fn m(&self) -> Option<u32> {
        self.a.symbols().map(|s| s.alphabet())
    }

    fn validate(&self) -> Result<()> {
        let n = self.a.len();
        for s in [&self.b, &self.x, &self.y] {
            if s.len() != n {
                return Err(Error::LengthMismatch { left: n, right: s.len() });
            }
        }
        let bad = |what: &str| Err(Error::InvalidArgument(format!("{:?} quadruple: {what}", self.kind)));
        match self.kind {
            SystemKind::Pr => {
                if [&self.a, &self.b, &self.x, &self.y].iter().any(|s| s.bits().is_none()) {
                    return bad("all strings must be binary");
                }
            }
            SystemKind::Chained => {
                let (Some(a), Some(b)) = (self.a.symbols(), self.b.symbols()) else {
                    return bad("inputs must be symbol strings");
                };
                if self.x.bits().is_none() || self.y.bits().is_none() {
                    return bad("outputs must be binary");
                }
                let m = a.alphabet();
                if m < 3 || b.alphabet() != m {
                    return bad("inputs need a common alphabet with m >= 3");
                }
                if let Some(i) = (0..n).find(|&i| b.get(i) != a.get(i) && b.get(i) != a.get(i) % m + 1) {
                    return bad(&format!("promise broken at position {i}"));
                }
            }
            SystemKind::MagicSquare => {
                let alphabets: Vec<Option<u32>> =
                    [&self.a, &self.b, &self.x, &self.y].iter().map(|s| s.symbols().map(|s| s.alphabet())).collect();
                if alphabets != [Some(3), Some(3), Some(4), Some(4)] {
                    return bad("inputs must be over {1,2,3} and outputs over {1,2,3,4}");
                }
            }
        }
        Ok(())
    }

    pub fn header(&self) -> QuadrupleHeader {
        QuadrupleHeader {
            kind: self.kind,
            m: self.m(),
            n: self.len(),
            seed: self.seed.map(|s| s.to_hex()),
            strategy: self.strategy.clone(),
        }
    }

    /// One JSON header line followed by the four aligned strings.
    pub fn to_text(&self) -> String {
        let header = serde_json::to_string(&self.header()).expect("header serializes");
        format!("{header}\n{}\n{}\n{}\n{}\n", self.a, self.b, self.x, self.y)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let mut next = || lines.next().ok_or_else(|| Error::MalformedFile("quadruple file needs 5 lines".into()));
        let header: QuadrupleHeader = serde_json::from_str(next()?)?;
        let bits = |l: &str| BitString::parse(l).map(Strand::Bits);
        let syms = |l: &str, m: u32| SymbolString::parse(l, m).map(Strand::Symbols);
        let (a, b, x, y) = (next()?, next()?, next()?, next()?);
        let (a, b, x, y) = match header.kind {
            SystemKind::Pr => (bits(a)?, bits(b)?, bits(x)?, bits(y)?),
            SystemKind::Chained => {
                let m = header.m.ok_or_else(|| Error::MalformedFile("chained header needs m".into()))?;
                (syms(a, m)?, syms(b, m)?, bits(x)?, bits(y)?)
            }
            SystemKind::MagicSquare => (syms(a, 3)?, syms(b, 3)?, syms(x, 4)?, syms(y, 4)?),
        };
        let seed = match header.seed.as_deref() {
            None => None,
            Some(hex) => Some(parse_seed_hex(hex)?),
        };
        let q = Quadruple { kind: header.kind, a, b, x, y, seed, strategy: header.strategy };
        q.validate().map_err(|e| Error::MalformedFile(e.to_string()))?;
        if q.len() != header.n {
            return Err(Error::MalformedFile(format!("header says n = {}, strings have {}", header.n, q.len())));
        }
        Ok(q)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Quadruple::from_text(&std::fs::read_to_string(path)?)
    }
}

pub(crate) fn parse_seed_hex(hex: &str) -> Result<Seed> {
    if hex.len() != 64 {
        return Err(Error::MalformedFile(format!("seed must be 64 hex digits, got {}", hex.len())));
    }
    let mut bytes = [0u8; 32];
    for (i, byte) in bytes.iter_mut().enumerate() {
        *byte = u8::from_str_radix(&hex[2 * i..2 * i + 2], 16)
            .map_err(|_| Error::MalformedFile(format!("bad seed hex {hex:?}")))?;
    }
    Ok(Seed(bytes))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationCheck {
    pub n: usize,
    pub ok_count: usize,
    pub violations: Vec<usize>,
}

impl RelationCheck {
    pub fn violation_fraction(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.violations.len() as f64 / self.n as f64
        }
    }
}

/// Evaluates the winning predicate of the quadruple's kind at every position.
pub fn check_relation(q: &Quadruple) -> RelationCheck {
    let n = q.len();
    let violations: Vec<usize> = match q.kind {
        SystemKind::Pr => {
            let (a, b, x, y) = (q.a.bits().unwrap(), q.b.bits().unwrap(), q.x.bits().unwrap(), q.y.bits().unwrap());
            let bad = x.xor(y).unwrap().xor(&a.and(b).unwrap()).unwrap();
            bad.ones_positions()
        }
        SystemKind::Chained => {
            let chi = chained_indicator(q.a.symbols().unwrap(), q.b.symbols().unwrap());
            let bad = q.x.bits().unwrap().xor(q.y.bits().unwrap()).unwrap().xor(&chi).unwrap();
            bad.ones_positions()
        }
        SystemKind::MagicSquare => {
            let (a, b, x, y) =
                (q.a.symbols().unwrap(), q.b.symbols().unwrap(), q.x.symbols().unwrap(), q.y.symbols().unwrap());
            (0..n).filter(|&i| !magic_wins(a.get(i), b.get(i), x.get(i), y.get(i))).collect()
        }
    };
    RelationCheck { n, ok_count: n - violations.len(), violations }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedVerdict {
    pub name: String,
    #[serde(flatten)]
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoSignalingReport {
    pub verdict: Verdict,
    pub k_x_given_a: ComplexityEstimate,
    pub k_x_given_ab: ComplexityEstimate,
    pub k_y_given_b: ComplexityEstimate,
    pub k_y_given_ab: ComplexityEstimate,
    pub checks: Vec<NamedVerdict>,
}

fn refs(parts: &[BitString]) -> Vec<&BitString> {
    parts.iter().collect()
}

/// Static no-signaling: `K(x|a) ≈ K(x|ab)` and `K(y|b) ≈ K(y|ab)`, each
/// difference judged against `eps_dep · n`.
pub fn test_no_signaling(q: &Quadruple, th: &Thresholds, c: &dyn Compressor) -> Result<NoSignalingReport> {
    th.check_len(q.len())?;
    let (a, b) = (q.a.parts(), q.b.parts());
    let ab: Vec<BitString> = a.iter().chain(b.iter()).cloned().collect();
    let (x, y) = (q.x.flat(), q.y.flat());
    let ((xa, xab), (yb, yab)) = rayon::join(
        || rayon::join(|| estimate_k_cond(&x, &refs(&a), c, None), || estimate_k_cond(&x, &refs(&ab), c, None)),
        || rayon::join(|| estimate_k_cond(&y, &refs(&b), c, None), || estimate_k_cond(&y, &refs(&ab), c, None)),
    );
    let (xa, xab, yb, yab) = (xa?, xab?, yb?, yab?);
    let gap = |p: &ComplexityEstimate, q: &ComplexityEstimate| {
        let d = (p.value_bits as f64 - q.value_bits as f64).abs() / p.n.max(1) as f64;
        Verdict::from_margin(th.eps_dep - d)
    };
    let checks = vec![
        NamedVerdict { name: "K(x|a)~K(x|ab)".into(), verdict: gap(&xa, &xab) },
        NamedVerdict { name: "K(y|b)~K(y|ab)".into(), verdict: gap(&yb, &yab) },
    ];
    let verdict = Verdict::all(&checks.iter().map(|c| c.verdict).collect::<Vec<_>>());
    Ok(NoSignalingReport { verdict, k_x_given_a: xa, k_x_given_ab: xab, k_y_given_b: yb, k_y_given_ab: yab, checks })
}

/// Candidate hidden variable, possibly made of several aligned strings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HiddenVariable {
    pub parts: Vec<BitString>,
}

impl HiddenVariable {
    pub fn new(lambda: BitString) -> Self {
        HiddenVariable { parts: vec![lambda] }
    }

    pub fn len(&self) -> usize {
        self.parts.iter().map(|p| p.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    /// The supplied λ passed all three conditions.
    Supplied,
    /// `K(a,b) ≈ 0`.
    SimpleInputs,
    /// `K(x,y) ≈ 0`.
    SimpleOutputs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalityReport {
    /// True only when a certificate was found. False without a supplied λ
    /// means "no certificate", not a proof of non-locality.
    pub local: bool,
    pub certificate: Option<Certificate>,
    pub checks: Vec<NamedVerdict>,
}

pub fn test_locality(
    q: &Quadruple,
    lambda: Option<&HiddenVariable>,
    th: &Thresholds,
    c: &dyn Compressor,
) -> Result<LocalityReport> {
    th.check_len(q.len())?;
    let (a, b) = (q.a.parts(), q.b.parts());
    let ab: Vec<&BitString> = a.iter().chain(b.iter()).collect();
    match lambda {
        Some(lambda) => {
            let lam: Vec<&BitString> = lambda.parts.iter().collect();
            let ab_lam: Vec<&BitString> = ab.iter().chain(lam.iter()).copied().collect();
            let (k_ab, (k_lam, k_ab_lam)) = rayon::join(
                || estimate_k_joint(&ab, c).value_bits,
                || rayon::join(|| estimate_k_joint(&lam, c).value_bits, || estimate_k_joint(&ab_lam, c).value_bits),
            );
            let scale = (q.len() * ab.len()).min(lambda.len()).max(1) as f64;
            let info = (k_ab + k_lam).saturating_sub(k_ab_lam) as f64 / scale;
            let independent = Verdict::from_margin(th.eps_dep - info);

            let a_lam: Vec<&BitString> = a.iter().chain(lambda.parts.iter()).collect();
            let b_lam: Vec<&BitString> = b.iter().chain(lambda.parts.iter()).collect();
            let (x, y) = (q.x.flat(), q.y.flat());
            let (xe, ye) =
                rayon::join(|| estimate_k_cond(&x, &a_lam, c, None), || estimate_k_cond(&y, &b_lam, c, None));
            let checks = vec![
                NamedVerdict { name: "K(a,b,l)~K(a,b)+K(l)".into(), verdict: independent },
                NamedVerdict { name: "K(x|a,l)~0".into(), verdict: th.approx_zero(&xe?) },
                NamedVerdict { name: "K(y|b,l)~0".into(), verdict: th.approx_zero(&ye?) },
            ];
            let local = checks.iter().all(|c| c.verdict.holds());
            Ok(LocalityReport { local, certificate: local.then_some(Certificate::Supplied), checks })
        }
        None => {
            let inputs = th.approx_zero(&estimate_k_joint(&ab, c));
            let (x, y) = (q.x.parts(), q.y.parts());
            let xy: Vec<&BitString> = x.iter().chain(y.iter()).collect();
            let outputs = th.approx_zero(&estimate_k_joint(&xy, c));
            let certificate = if inputs.holds() {
                Some(Certificate::SimpleInputs)
            } else if outputs.holds() {
                Some(Certificate::SimpleOutputs)
            } else {
                None
            };
            let checks = vec![
                NamedVerdict { name: "K(a,b)~0".into(), verdict: inputs },
                NamedVerdict { name: "K(x,y)~0".into(), verdict: outputs },
            ];
            Ok(LocalityReport { local: certificate.is_some(), certificate, checks })
        }
    }
}
