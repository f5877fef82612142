use rand::RngCore;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::{games, HiddenVariable, Quadruple, Strand, SystemKind};
use crate::bits::{sample_biased, sample_incompressible, BitString, Seed, SymbolString};
use crate::error::{Error, Result};

/// Deterministic local strategy given by lookup tables on blocks.
///
/// Each round consumes `block_len` input bits and `lambda_block` bits of the
/// shared λ. The table index is the input block (bit `j` = position
/// `start + j`) OR-ed with the λ block shifted left by `block_len`; the entry
/// is the output block in the same bit order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalStrategy {
    pub name: String,
    pub block_len: usize,
    pub lambda_block: usize,
    pub f: Vec<u32>,
    pub g: Vec<u32>,
}

impl LocalStrategy {
    /// Builds a strategy with one-bit blocks from per-bit functions of
    /// `(input, λ)`.
    pub fn bitwise(name: &str, with_lambda: bool, f: impl Fn(bool, bool) -> bool, g: impl Fn(bool, bool) -> bool) -> Self {
        let lambda_block = with_lambda as usize;
        let table = |h: &dyn Fn(bool, bool) -> bool| {
            (0..1u32 << (1 + lambda_block)).map(|i| h(i & 1 == 1, i & 2 == 2) as u32).collect()
        };
        LocalStrategy { name: name.into(), block_len: 1, lambda_block, f: table(&f), g: table(&g) }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let err = |m: String| Err(Error::BadBlockAlignment(format!("{}: {m}", self.name)));
        if self.block_len == 0 || self.block_len + self.lambda_block > 16 {
            return err(format!("block sizes {} + {} unsupported", self.block_len, self.lambda_block));
        }
        if n % self.block_len != 0 {
            return err(format!("n = {n} is not a multiple of block_len {}", self.block_len));
        }
        let size = 1usize << (self.block_len + self.lambda_block);
        let limit = 1u32 << self.block_len;
        for (t, which) in [(&self.f, "f"), (&self.g, "g")] {
            if t.len() != size || t.iter().any(|&v| v >= limit) {
                return err(format!("table {which} must have {size} entries below {limit}"));
            }
        }
        Ok(())
    }

    pub fn lambda_len(&self, n: usize) -> usize {
        n / self.block_len * self.lambda_block
    }

    fn apply(&self, table: &[u32], input: &BitString, lambda: &BitString) -> BitString {
        let bl = self.block_len;
        let mut out = BitString::zeros(input.len());
        for blk in 0..input.len() / bl {
            let inp = input.word_at(blk * bl) & ((1 << bl) - 1);
            let lam = if self.lambda_block == 0 {
                0
            } else {
                lambda.word_at(blk * self.lambda_block) & ((1 << self.lambda_block) - 1)
            };
            let v = table[(inp | (lam << bl)) as usize];
            for j in 0..bl {
                out.set(blk * bl + j, (v >> j) & 1 == 1);
            }
        }
        out
    }
}

/// The deterministic local strategies used by the local-collapse checks.
pub fn bundled_local_strategies() -> Vec<LocalStrategy> {
    vec![
        LocalStrategy::bitwise("const0", false, |_, _| false, |_, _| false),
        LocalStrategy::bitwise("identity", false, |a, _| a, |b, _| b),
        LocalStrategy::bitwise("shared-lambda", true, |_, l| l, |_, l| l),
        LocalStrategy::bitwise("xor-lambda", true, |a, l| a ^ l, |b, l| b ^ l),
        LocalStrategy::bitwise("and-or-lambda", true, |a, l| a & l, |b, l| b | !l),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum PrStrategy {
    /// `x` unbiased, `y := x ⊕ a·b`.
    NonlocalUnbiased,
    /// `x := f(a, λ)`, `y := g(b, λ)` with λ drawn from the seed.
    Local(LocalStrategy),
    /// `x` one with probability `p`, `y := x ⊕ a·b`.
    Biased { p: f64 },
}

impl PrStrategy {
    pub fn label(&self) -> String {
        match self {
            PrStrategy::NonlocalUnbiased => "nonlocal_unbiased".into(),
            PrStrategy::Local(s) => format!("local:{}", s.name),
            PrStrategy::Biased { p } => format!("biased:{p}"),
        }
    }
}

/// PR-box data. Inputs come from the child seeds `"a"` and `"b"`, outputs
/// from `"x"`, and a local strategy's λ from `"lambda"`.
///
/// Returns the quadruple and, for local strategies with shared randomness,
/// the λ that was used.
pub fn gen_pr(n: usize, seed: &Seed, strategy: &PrStrategy) -> Result<(Quadruple, Option<HiddenVariable>)> {
    let a = sample_incompressible(n, &seed.derive("a"));
    let b = sample_incompressible(n, &seed.derive("b"));
    let ab = a.and(&b)?;
    let (x, y, lambda) = match strategy {
        PrStrategy::NonlocalUnbiased => {
            let x = sample_incompressible(n, &seed.derive("x"));
            let y = x.xor(&ab)?;
            (x, y, None)
        }
        PrStrategy::Biased { p } => {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::InvalidArgument(format!("bias {p} outside [0, 1]")));
            }
            let x = sample_biased(n, *p, &seed.derive("x"));
            let y = x.xor(&ab)?;
            (x, y, None)
        }
        PrStrategy::Local(s) => {
            s.validate(n)?;
            let lambda = sample_incompressible(s.lambda_len(n), &seed.derive("lambda"));
            let x = s.apply(&s.f, &a, &lambda);
            let y = s.apply(&s.g, &b, &lambda);
            let hv = (s.lambda_block > 0).then(|| HiddenVariable::new(lambda));
            (x, y, hv)
        }
    };
    let q = Quadruple {
        kind: SystemKind::Pr,
        a: Strand::Bits(a),
        b: Strand::Bits(b),
        x: Strand::Bits(x),
        y: Strand::Bits(y),
        seed: Some(*seed),
        strategy: strategy.label(),
    };
    Ok((q, lambda))
}

/// Uniform draw from `0..m` by rejection on 32-bit keystream words: a word
/// `w` is accepted when `w < m · floor(2^32 / m)` and mapped to `w mod m`.
fn uniform_below(rng: &mut ChaCha20Rng, m: u32) -> u32 {
    let zone = (u32::MAX / m) * m;
    loop {
        let w = rng.next_u32();
        if w < zone {
            return w % m;
        }
    }
}

/// `n` symbols uniform over `1..=m`.
pub fn uniform_symbols(n: usize, m: u32, seed: &Seed) -> Result<SymbolString> {
    let mut rng = seed.rng();
    SymbolString::new((0..n).map(|_| 1 + uniform_below(&mut rng, m)).collect(), m)
}

/// `χ_i = 1` exactly when `a_i = m` and `b_i = 1`.
pub fn chained_indicator(a: &SymbolString, b: &SymbolString) -> BitString {
    let m = a.alphabet();
    BitString::from_fn(a.len().min(b.len()), |i| a.get(i) == m && b.get(i) == 1)
}

/// Chained-Bell data: `a` uniform (child seed `"a"`), `b = a` or `a + 1 mod m`
/// by the bits of child seed `"b"`, `x` unbiased (`"x"`), and
/// `y = x ⊕ χ ⊕ e` where `e` has ones at rate `error_rate` (`"errors"`).
pub fn gen_chained(n: usize, m: u32, seed: &Seed, error_rate: f64) -> Result<Quadruple> {
    if m < 3 {
        return Err(Error::InvalidArgument(format!("chained system needs m >= 3, got {m}")));
    }
    if !(0.0..1.0).contains(&error_rate) {
        return Err(Error::InvalidArgument(format!("error rate {error_rate} outside [0, 1)")));
    }
    let a = uniform_symbols(n, m, &seed.derive("a"))?;
    let shift = sample_incompressible(n, &seed.derive("b"));
    let b = SymbolString::new((0..n).map(|i| if shift.get(i) { a.get(i) % m + 1 } else { a.get(i) }).collect(), m)?;
    let chi = chained_indicator(&a, &b);
    let x = sample_incompressible(n, &seed.derive("x"));
    let errors = sample_biased(n, error_rate, &seed.derive("errors"));
    let y = x.xor(&chi)?.xor(&errors)?;
    Ok(Quadruple {
        kind: SystemKind::Chained,
        a: Strand::Symbols(a),
        b: Strand::Symbols(b),
        x: Strand::Bits(x),
        y: Strand::Bits(y),
        seed: Some(*seed),
        strategy: format!("error_rate:{error_rate}"),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum MagicStrategy {
    /// Per round, `x` uniform and `y` uniform among the answers that win.
    ConsistentPerRound,
    /// Fixed answers per row (Alice) and per column (Bob).
    Deterministic { alice: [u32; 3], bob: [u32; 3] },
}

/// Magic-square data with uniform rows `a` (child seed `"a"`) and columns `b`
/// (`"b"`); answer randomness comes from `"answers"`.
pub fn gen_magic_square(n: usize, seed: &Seed, strategy: &MagicStrategy) -> Result<Quadruple> {
    let a = uniform_symbols(n, 3, &seed.derive("a"))?;
    let b = uniform_symbols(n, 3, &seed.derive("b"))?;
    let (x, y, label) = match strategy {
        MagicStrategy::ConsistentPerRound => {
            let mut rng = seed.derive("answers").rng();
            let mut xs = Vec::with_capacity(n);
            let mut ys = Vec::with_capacity(n);
            for i in 0..n {
                let x = 1 + uniform_below(&mut rng, 4);
                let winning: Vec<u32> = (1..=4).filter(|&y| games::magic_wins(a.get(i), b.get(i), x, y)).collect();
                xs.push(x);
                ys.push(winning[uniform_below(&mut rng, winning.len() as u32) as usize]);
            }
            (xs, ys, "consistent_per_round".to_string())
        }
        MagicStrategy::Deterministic { alice, bob } => {
            if alice.iter().chain(bob.iter()).any(|&s| !(1..=4).contains(&s)) {
                return Err(Error::InvalidArgument("magic-square answers must be in 1..=4".into()));
            }
            let xs = a.symbols().iter().map(|&r| alice[r as usize - 1]).collect();
            let ys = b.symbols().iter().map(|&c| bob[c as usize - 1]).collect();
            (xs, ys, format!("deterministic:{alice:?}:{bob:?}"))
        }
    };
    Ok(Quadruple {
        kind: SystemKind::MagicSquare,
        a: Strand::Symbols(a),
        b: Strand::Symbols(b),
        x: Strand::Symbols(SymbolString::new(x, 4)?),
        y: Strand::Symbols(SymbolString::new(y, 4)?),
        seed: Some(*seed),
        strategy: label,
    })
}
