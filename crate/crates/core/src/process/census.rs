use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{vector_ascii, GlobalRelation};
use crate::error::{Error, Result};

pub const CENSUS_PARTY_LIMIT: usize = 3;

/// Exemplar relation indices kept per class.
pub const EXEMPLARS_PER_CLASS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationClass {
    Inconsistent,
    ConsistentCausal,
    ConsistentNonCausal,
}

impl RelationClass {
    pub const ALL: [RelationClass; 3] =
        [RelationClass::Inconsistent, RelationClass::ConsistentCausal, RelationClass::ConsistentNonCausal];
}

impl fmt::Display for RelationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelationClass::Inconsistent => "inconsistent",
            RelationClass::ConsistentCausal => "consistent_causal",
            RelationClass::ConsistentNonCausal => "consistent_non_causal",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationAnalysis {
    pub class: RelationClass,
    pub min_fixed_points: u32,
    pub max_fixed_points: u32,
    /// Parties whose input depends on the other parties' outputs.
    pub has_past: Vec<bool>,
}

fn lcm_up_to(m: u64) -> u64 {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 { a } else { gcd(b, a % b) }
    }
    (1..=m).fold(1, |l, i| l / gcd(l, i) * i)
}

/// Exact classification under uniformly random local operations and uniform
/// choice among fixed points.
///
/// Output vector `o` is a fixed point of exactly the `2^k` combinations that
/// give each party either the constant `o_j` or the map taking `g(o)_j` to
/// `o_j`. Weighting every combination by `L = lcm(1..2^k)` makes each fixed
/// point's share an integer, and party `j` has a causal past when its input
/// bit is not independent of the other outputs under these weights.
///
/// The `2^k` vectors cover `4^k` incidences in total, so a consistent relation
/// has exactly one fixed point per combination.
pub fn analyze_relation(g: &GlobalRelation) -> RelationAnalysis {
    let k = g.k();
    let outs = 1usize << k;
    let combos_of = |o: usize| {
        let inp = g.apply(o as u32) as usize;
        (0..outs).map(move |s| {
            (0..k)
                .map(|j| {
                    let oj = (o >> j) & 1;
                    let code = if (s >> j) & 1 == 0 {
                        oj
                    } else if (inp >> j) & 1 == oj {
                        2
                    } else {
                        3
                    };
                    code << (2 * j)
                })
                .sum::<usize>()
        })
    };
    let mut count = vec![0u32; 1 << (2 * k)];
    for o in 0..outs {
        for c in combos_of(o) {
            count[c] += 1;
        }
    }
    let min_fixed_points = *count.iter().min().unwrap();
    let max_fixed_points = *count.iter().max().unwrap();
    if min_fixed_points == 0 {
        return RelationAnalysis {
            class: RelationClass::Inconsistent,
            min_fixed_points,
            max_fixed_points,
            has_past: vec![false; k],
        };
    }
    let l = lcm_up_to(outs as u64);
    let weight: Vec<u64> = (0..outs).map(|o| combos_of(o).map(|c| l / count[c] as u64).sum()).collect();
    let total: u64 = weight.iter().sum();
    let has_past: Vec<bool> = (0..k)
        .map(|j| {
            // Joint weight of (input bit j = 1, other outputs = r) against the product of marginals.
            let mut rest = vec![0u64; outs];
            let mut joint = vec![0u64; outs];
            let mut ones = 0u64;
            for (o, &w) in weight.iter().enumerate() {
                let r = o & !(1 << j);
                rest[r] += w;
                if (g.apply(o as u32) >> j) & 1 == 1 {
                    joint[r] += w;
                    ones += w;
                }
            }
            (0..outs).any(|r| joint[r] as u128 * total as u128 != ones as u128 * rest[r] as u128)
        })
        .collect();
    let class = if has_past.iter().all(|&p| p) {
        RelationClass::ConsistentNonCausal
    } else {
        RelationClass::ConsistentCausal
    };
    RelationAnalysis { class, min_fixed_points, max_fixed_points, has_past }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCount {
    pub class: RelationClass,
    pub count: u64,
    /// Smallest relation indices in the class.
    pub exemplars: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusReport {
    pub k: usize,
    pub total: u64,
    pub classes: Vec<ClassCount>,
    /// Class of every relation by index, kept for `k <= 2`.
    pub per_relation: Option<Vec<RelationClass>>,
}

impl CensusReport {
    pub fn count(&self, class: RelationClass) -> u64 {
        self.classes.iter().find(|c| c.class == class).map_or(0, |c| c.count)
    }

    /// `relation_index,class,table,min_fixed_points,max_fixed_points`: every
    /// relation when kept, otherwise the exemplars.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "relation_index,class,table,min_fixed_points,max_fixed_points")?;
        let rows: Vec<u64> = match &self.per_relation {
            Some(all) => (0..all.len() as u64).collect(),
            None => {
                let mut v: Vec<u64> = self.classes.iter().flat_map(|c| c.exemplars.iter().copied()).collect();
                v.sort_unstable();
                v
            }
        };
        for idx in rows {
            let g = GlobalRelation::from_index(self.k, idx)?;
            let a = analyze_relation(&g);
            let table: Vec<String> = (0..1u32 << self.k)
                .map(|o| format!("{}>{}", vector_ascii(o, self.k), vector_ascii(g.apply(o), self.k)))
                .collect();
            writeln!(out, "{idx},{},{},{},{}", a.class, table.join(" "), a.min_fixed_points, a.max_fixed_points)?;
        }
        Ok(())
    }
}

/// Classifies all `2^(k 2^k)` bit-wise relations on `k` parties.
pub fn census(k: usize) -> Result<CensusReport> {
    if k > CENSUS_PARTY_LIMIT {
        return Err(Error::TooManyParties { k, limit: CENSUS_PARTY_LIMIT });
    }
    if k == 0 {
        return Err(Error::InvalidArgument("census needs at least one party".into()));
    }
    let total = 1u64 << (k * (1 << k));
    let keep = k <= 2;
    const CHUNK: u64 = 1 << 14;
    let parts: Vec<([u64; 3], [Vec<u64>; 3], Vec<RelationClass>)> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|ci| {
            let mut counts = [0u64; 3];
            let mut ex: [Vec<u64>; 3] = Default::default();
            let mut all = Vec::new();
            for idx in ci * CHUNK..((ci + 1) * CHUNK).min(total) {
                let class = analyze_relation(&GlobalRelation::from_index(k, idx).expect("index in range")).class;
                let slot = class as usize;
                counts[slot] += 1;
                if ex[slot].len() < EXEMPLARS_PER_CLASS {
                    ex[slot].push(idx);
                }
                if keep {
                    all.push(class);
                }
            }
            (counts, ex, all)
        })
        .collect();
    let mut counts = [0u64; 3];
    let mut exemplars: [Vec<u64>; 3] = Default::default();
    let mut per_relation = keep.then(Vec::new);
    for (c, ex, all) in parts {
        for s in 0..3 {
            counts[s] += c[s];
            let room = EXEMPLARS_PER_CLASS - exemplars[s].len();
            exemplars[s].extend(ex[s].iter().take(room));
        }
        if let Some(v) = per_relation.as_mut() {
            v.extend(all);
        }
    }
    let classes = RelationClass::ALL
        .iter()
        .map(|&class| ClassCount { class, count: counts[class as usize], exemplars: exemplars[class as usize].clone() })
        .collect();
    Ok(CensusReport { k, total, classes, per_relation })
}
