//! Exhaustive classical values of the PR game under parallel repetition and
//! of the magic-square game.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelValue {
    pub rounds: u32,
    /// Input pairs won by the best strategy.
    pub wins: u32,
    /// `4^rounds` input pairs.
    pub total: u32,
    /// Optimal tables, `f[a]` and `g[b]` on `rounds`-bit blocks.
    pub f: Vec<u32>,
    pub g: Vec<u32>,
}

/// Input pairs `(a, b)` with `f(a) ⊕ g(b) = a ∧ b` in every position.
pub fn pr_parallel_wins(r: u32, f: &[u32], g: &[u32]) -> u32 {
    let size = 1u32 << r;
    let mut wins = 0;
    for a in 0..size {
        for b in 0..size {
            wins += (f[a as usize] ^ g[b as usize] == a & b) as u32;
        }
    }
    wins
}

/// Best deterministic strategy for `r` parallel PR games.
///
/// For each `f` the best `g` is found independently per `b`; ties keep the
/// first table in lexicographic order of the table digits.
pub fn pr_parallel_value(r: u32) -> Result<ParallelValue> {
    if r == 0 {
        return Err(Error::InvalidArgument("at least one round".into()));
    }
    if r > 2 {
        return Err(Error::TooLarge(format!("{r} parallel rounds; exhaustive search supports at most 2")));
    }
    let size = 1u32 << r;
    let tables = size.pow(size);
    let decode = |mut idx: u32| {
        let mut t = vec![0; size as usize];
        for v in t.iter_mut() {
            *v = idx % size;
            idx /= size;
        }
        t
    };
    let (wins, fi, g) = (0..tables)
        .into_par_iter()
        .map(|fi| {
            let f = decode(fi);
            let mut g = Vec::with_capacity(size as usize);
            let mut total = 0;
            for b in 0..size {
                let (best, y) = (0..size)
                    .map(|y| ((0..size).filter(|&a| f[a as usize] ^ y == a & b).count() as u32, y))
                    .fold((0, 0), |acc, c| if c.0 > acc.0 { c } else { acc });
                total += best;
                g.push(y);
            }
            (total, fi, g)
        })
        .reduce(|| (0, u32::MAX, Vec::new()), |p, q| if q.0 > p.0 || (q.0 == p.0 && q.1 < p.1) { q } else { p });
    Ok(ParallelValue { rounds: r, wins, total: size * size, f: decode(fi), g })
}

/// Alice's row for answer `x`: the free entries are `(x - 1) >> 1` and
/// `(x - 1) & 1`, the third makes the row parity even.
fn row_entries(x: u32) -> [u32; 3] {
    let (u, v) = ((x - 1) >> 1, (x - 1) & 1);
    [u, v, u ^ v]
}

/// Bob's column for answer `y`, completed to odd parity.
fn column_entries(y: u32) -> [u32; 3] {
    let (s, t) = ((y - 1) >> 1, (y - 1) & 1);
    [s, t, 1 ^ s ^ t]
}

/// Round won: Alice's entry in column `b` equals Bob's entry in row `a`.
pub fn magic_wins(a: u32, b: u32, x: u32, y: u32) -> bool {
    row_entries(x)[b as usize - 1] == column_entries(y)[a as usize - 1]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MagicValue {
    pub wins: u32,
    pub rounds: u32,
    pub alice: [u32; 3],
    pub bob: [u32; 3],
}

impl MagicValue {
    pub fn fraction(&self) -> f64 {
        self.wins as f64 / self.rounds as f64
    }
}

/// Classical value over all `4^3 × 4^3` deterministic answer tables.
pub fn magic_square_value() -> MagicValue {
    let table = |i: u32| [1 + i % 4, 1 + (i / 4) % 4, 1 + i / 16];
    let mut best = MagicValue { wins: 0, rounds: 9, alice: [1; 3], bob: [1; 3] };
    for ai in 0..64 {
        let alice = table(ai);
        for bi in 0..64 {
            let bob = table(bi);
            let wins = (1..=3u32)
                .flat_map(|r| (1..=3u32).map(move |c| (r, c)))
                .filter(|&(r, c)| magic_wins(r, c, alice[r as usize - 1], bob[c as usize - 1]))
                .count() as u32;
            if wins > best.wins {
                best = MagicValue { wins, rounds: 9, alice, bob };
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_round_fixed_strategies() {
        // constant answers lose only at a = b = 1
        assert_eq!(pr_parallel_wins(1, &[0, 0], &[0, 0]), 3);
        // x ⊕ y = a ⊕ b agrees with a ∧ b only at a = b = 0
        assert_eq!(pr_parallel_wins(1, &[0, 1], &[0, 1]), 1);
    }

    #[test]
    fn rows_even_columns_odd() {
        for s in 1..=4 {
            assert_eq!(row_entries(s).iter().sum::<u32>() % 2, 0);
            assert_eq!(column_entries(s).iter().sum::<u32>() % 2, 1);
        }
        assert!(pr_parallel_value(3).is_err());
        assert!(pr_parallel_value(0).is_err());
    }
}
