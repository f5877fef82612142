//! Parties with universal local operations, bit-wise global relations and
//! their fixed points.

mod census;
mod scenario;

pub use census::*;
pub use scenario::*;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};

pub const DEFAULT_PARTY_LIMIT: usize = 8;

/// The four unary maps selectable by a pair of control bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalOp {
    Const0,
    Const1,
    Identity,
    Negation,
}

impl LocalOp {
    /// Ordered by their two-bit code in combo indices.
    pub const ALL: [LocalOp; 4] = [LocalOp::Const0, LocalOp::Const1, LocalOp::Identity, LocalOp::Negation];

    /// `(0,0)` is constant 0, `(1,1)` constant 1, `(0,1)` identity, `(1,0)` negation.
    pub fn from_control(c0: bool, c1: bool) -> Self {
        match (c0, c1) {
            (false, false) => LocalOp::Const0,
            (true, true) => LocalOp::Const1,
            (false, true) => LocalOp::Identity,
            (true, false) => LocalOp::Negation,
        }
    }

    pub fn code(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn apply(self, input: bool) -> bool {
        match self {
            LocalOp::Const0 => false,
            LocalOp::Const1 => true,
            LocalOp::Identity => input,
            LocalOp::Negation => !input,
        }
    }
}

impl fmt::Display for LocalOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LocalOp::Const0 => "const0",
            LocalOp::Const1 => "const1",
            LocalOp::Identity => "id",
            LocalOp::Negation => "neg",
        })
    }
}

pub fn combo_name(combo: &[LocalOp]) -> String {
    let parts: Vec<String> = combo.iter().map(|o| o.to_string()).collect();
    format!("({})", parts.join(","))
}

/// Party `j` uses `LocalOp::ALL[(index >> 2j) & 3]`.
pub fn combo_from_index(k: usize, index: usize) -> Vec<LocalOp> {
    (0..k).map(|j| LocalOp::ALL[(index >> (2 * j)) & 3]).collect()
}

pub fn combo_index(combo: &[LocalOp]) -> usize {
    combo.iter().enumerate().map(|(j, o)| o.code() << (2 * j)).sum()
}

/// Applies the per-round operation selected by control bits `2i, 2i+1` to input bit `i`.
pub fn universal_local_op(control: &BitString, input: &BitString) -> Result<BitString> {
    if control.len() != 2 * input.len() {
        return Err(Error::LengthMismatch { left: control.len(), right: 2 * input.len() });
    }
    Ok(BitString::from_fn(input.len(), |i| {
        LocalOp::from_control(control.get(2 * i), control.get(2 * i + 1)).apply(input.get(i))
    }))
}

/// `k` output bits to `k` input bits, applied independently per round. Bit `j`
/// of a vector belongs to party `j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RelationFile", into = "RelationFile")]
pub struct GlobalRelation {
    k: usize,
    table: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct RelationFile {
    k: usize,
    /// Output vector to input vector, character `j` for party `j`.
    rows: BTreeMap<String, String>,
}

impl From<GlobalRelation> for RelationFile {
    fn from(g: GlobalRelation) -> Self {
        let rows = (0..g.table.len() as u32).map(|o| (vector_ascii(o, g.k), vector_ascii(g.table[o as usize], g.k))).collect();
        RelationFile { k: g.k, rows }
    }
}

impl TryFrom<RelationFile> for GlobalRelation {
    type Error = Error;

    fn try_from(f: RelationFile) -> Result<Self> {
        if f.k == 0 || f.k > 16 {
            return Err(Error::MalformedFile(format!("unsupported party count {}", f.k)));
        }
        let mut table = vec![None; 1 << f.k];
        for (o, i) in &f.rows {
            let o = parse_vector(o, f.k)?;
            if table[o as usize].replace(parse_vector(i, f.k)?).is_some() {
                return Err(Error::MalformedFile(format!("row {} given twice", vector_ascii(o, f.k))));
            }
        }
        let table = table
            .into_iter()
            .enumerate()
            .map(|(o, i)| i.ok_or_else(|| Error::MalformedFile(format!("missing row {}", vector_ascii(o as u32, f.k)))))
            .collect::<Result<Vec<_>>>()?;
        GlobalRelation::new(f.k, table)
    }
}

/// Character `j` is bit `j`.
pub fn vector_ascii(v: u32, k: usize) -> String {
    (0..k).map(|j| if (v >> j) & 1 == 1 { '1' } else { '0' }).collect()
}

fn parse_vector(s: &str, k: usize) -> Result<u32> {
    if s.len() != k {
        return Err(Error::MalformedFile(format!("vector {s:?} should have {k} bits")));
    }
    s.chars().enumerate().try_fold(0u32, |v, (j, ch)| match ch {
        '0' => Ok(v),
        '1' => Ok(v | 1 << j),
        _ => Err(Error::MalformedFile(format!("bad bit {ch:?} in {s:?}"))),
    })
}

impl GlobalRelation {
    pub fn new(k: usize, table: Vec<u32>) -> Result<Self> {
        if k == 0 || k > 16 {
            return Err(Error::InvalidArgument(format!("unsupported party count {k}")));
        }
        if table.len() != 1 << k {
            return Err(Error::LengthMismatch { left: table.len(), right: 1 << k });
        }
        if let Some(bad) = table.iter().find(|&&v| v >> k != 0) {
            return Err(Error::InvalidArgument(format!("input vector {bad} has more than {k} bits")));
        }
        Ok(GlobalRelation { k, table })
    }

    /// Relation from a function of the output bits, party order.
    pub fn from_fn(k: usize, f: impl Fn(&[bool]) -> Vec<bool>) -> Result<Self> {
        let table = (0..1u32 << k)
            .map(|o| {
                let out: Vec<bool> = (0..k).map(|j| (o >> j) & 1 == 1).collect();
                let inp = f(&out);
                assert_eq!(inp.len(), k, "relation must return one bit per party");
                inp.iter().enumerate().map(|(j, &b)| u32::from(b) << j).sum()
            })
            .collect();
        GlobalRelation::new(k, table)
    }

    /// Inverse of [`GlobalRelation::index`] for `k <= 3`.
    pub fn from_index(k: usize, index: u64) -> Result<Self> {
        let width = k * (1 << k);
        if k == 0 || width > 63 || index >> width != 0 {
            return Err(Error::InvalidArgument(format!("relation index {index} out of range for k={k}")));
        }
        let mask = (1u64 << k) - 1;
        GlobalRelation::new(k, (0..1 << k).map(|o| ((index >> (k * o)) & mask) as u32).collect())
    }

    /// `sum over o of table[o] << (k o)`.
    pub fn index(&self) -> u64 {
        self.table.iter().enumerate().map(|(o, &i)| (i as u64) << (self.k * o)).sum()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    #[inline]
    pub fn apply(&self, outputs: u32) -> u32 {
        self.table[outputs as usize]
    }

    /// `A_I = 0`, `B_I = A_O`.
    pub fn one_way() -> Self {
        GlobalRelation::from_fn(2, |o| vec![false, o[0]]).unwrap()
    }

    /// `A_I = B_O`, `B_I = A_O`.
    pub fn two_way() -> Self {
        GlobalRelation::from_fn(2, |o| vec![o[1], o[0]]).unwrap()
    }

    /// `x = ¬b ∧ c`, `y = a ∧ ¬c`, `z = ¬a ∧ b`.
    pub fn three_party_cycle() -> Self {
        GlobalRelation::from_fn(3, |o| {
            let (a, b, c) = (o[0], o[1], o[2]);
            vec![!b && c, a && !c, !a && b]
        })
        .unwrap()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("relation serializes")
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Output vectors `o` with `combo(g(o)) = o`, by enumeration.
pub fn fixed_points(g: &GlobalRelation, combo: &[LocalOp]) -> Result<Vec<u32>> {
    if combo.len() != g.k {
        return Err(Error::LengthMismatch { left: combo.len(), right: g.k });
    }
    Ok((0..1u32 << g.k)
        .filter(|&o| {
            let inp = g.apply(o);
            combo.iter().enumerate().all(|(j, op)| op.apply((inp >> j) & 1 == 1) == ((o >> j) & 1 == 1))
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComboFixedPoints {
    pub combo: Vec<LocalOp>,
    /// ascii vectors, character `j` for party `j`.
    pub fixed_points: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyVerdict {
    pub k: usize,
    pub consistent: bool,
    /// Every combination has exactly one fixed point.
    pub deterministic_process: bool,
    pub per_combo: Vec<ComboFixedPoints>,
    pub failing_combos: Vec<Vec<LocalOp>>,
}

pub fn check_logical_consistency(g: &GlobalRelation) -> Result<ConsistencyVerdict> {
    check_logical_consistency_with_limit(g, DEFAULT_PARTY_LIMIT)
}

/// Fixed points of every one of the `4^k` local operation combinations.
pub fn check_logical_consistency_with_limit(g: &GlobalRelation, limit: usize) -> Result<ConsistencyVerdict> {
    if g.k > limit {
        return Err(Error::TooManyParties { k: g.k, limit });
    }
    let per_combo: Vec<ComboFixedPoints> = (0..1usize << (2 * g.k))
        .into_par_iter()
        .map(|c| {
            let combo = combo_from_index(g.k, c);
            let fps = fixed_points(g, &combo).expect("combo has k entries");
            ComboFixedPoints { combo, fixed_points: fps.into_iter().map(|o| vector_ascii(o, g.k)).collect() }
        })
        .collect();
    let failing_combos: Vec<Vec<LocalOp>> =
        per_combo.iter().filter(|c| c.fixed_points.is_empty()).map(|c| c.combo.clone()).collect();
    Ok(ConsistencyVerdict {
        k: g.k,
        consistent: failing_combos.is_empty(),
        deterministic_process: per_combo.iter().all(|c| c.fixed_points.len() == 1),
        per_combo,
        failing_combos,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_op_cases() {
        let ulo = |c: &str, i: &str| universal_local_op(&BitString::parse(c).unwrap(), &BitString::parse(i).unwrap());
        assert_eq!(ulo("01", "1").unwrap().to_ascii(), "1");
        assert_eq!(ulo("10", "1").unwrap().to_ascii(), "0");
        assert_eq!(ulo("0011", "10").unwrap().to_ascii(), "01");
        assert!(matches!(ulo("001", "10"), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn relation_index_round_trip() {
        for idx in [0u64, 1, 77, 255] {
            assert_eq!(GlobalRelation::from_index(2, idx).unwrap().index(), idx);
        }
        let g = GlobalRelation::three_party_cycle();
        assert_eq!(GlobalRelation::from_index(3, g.index()).unwrap(), g);
        assert!(GlobalRelation::from_index(2, 256).is_err());
    }

    #[test]
    fn relation_json_round_trip() {
        let g = GlobalRelation::one_way();
        let json = g.to_json();
        assert!(json.contains("\"10\": \"01\""), "{json}");
        assert_eq!(serde_json::from_str::<GlobalRelation>(&json).unwrap(), g);
        assert!(serde_json::from_str::<GlobalRelation>(r#"{"k":1,"rows":{"0":"1"}}"#).is_err());
    }

    #[test]
    fn combo_indexing() {
        let combo = vec![LocalOp::Identity, LocalOp::Negation, LocalOp::Const1];
        assert_eq!(combo_from_index(3, combo_index(&combo)), combo);
        assert_eq!(combo_name(&combo), "(id,neg,const1)");
    }
}
