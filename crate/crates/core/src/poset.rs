//! Causal order on a finite set of strings: `x ⪯ y` when `K(x|y) ≈ 0`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::complexity::{estimate_k, estimate_k_cond, Thresholds, Verdict};
use crate::compress::Compressor;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// Row element is a strict cause of the column element.
    Precedes,
    Succeeds,
    Equivalent,
    Spacelike,
    /// Both elements are themselves close to zero complexity.
    Indeterminate,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct PosetOptions {
    /// Evaluate subjects on this prefix only; conditions always enter in full.
    pub subject_prefix: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CausalPoset {
    pub names: Vec<String>,
    #[serde(skip)]
    pub elements: Vec<BitString>,
    pub lengths: Vec<usize>,
    pub compressor_id: String,
    pub thresholds: Thresholds,
    /// `relation[i][j]` describes element `i` relative to element `j`.
    pub relation: Vec<Vec<Relation>>,
    /// `leq[i][j]` is the raw verdict `i ⪯ j`.
    pub leq: Vec<Vec<bool>>,
    /// Margin of the verdict `i ⪯ j`.
    pub margins: Vec<Vec<f64>>,
    /// Estimated `K(i | j)` in bits.
    pub cond_bits: Vec<Vec<u64>>,
    /// Triples `(x, y, z)` with `x ⪯ y`, `y ⪯ z` but not `x ⪯ z`.
    pub violations: Vec<[String; 3]>,
    pub triples_checked: usize,
}

fn subject(s: &BitString, opts: &PosetOptions) -> BitString {
    match opts.subject_prefix {
        Some(p) if p < s.len() => s.prefix(p),
        _ => s.clone(),
    }
}

pub fn build_poset(elements: &[(String, BitString)], th: &Thresholds, c: &dyn Compressor) -> Result<CausalPoset> {
    build_poset_with(elements, th, c, &PosetOptions::default())
}

pub fn build_poset_with(
    elements: &[(String, BitString)],
    th: &Thresholds,
    c: &dyn Compressor,
    opts: &PosetOptions,
) -> Result<CausalPoset> {
    let k = elements.len();
    if k < 2 {
        return Err(Error::InvalidArgument("a causal structure needs at least two strings".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    for (name, s) in elements {
        if !seen.insert(name) {
            return Err(Error::InvalidArgument(format!("duplicate element name {name:?}")));
        }
        th.check_len(subject(s, opts).len())?;
    }
    let plain: Vec<bool> =
        elements.par_iter().map(|(_, s)| th.approx_zero(&estimate_k(&subject(s, opts), c)).holds()).collect();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).filter(|(i, j)| i != j).collect();
    let estimates: Vec<(u64, Verdict)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let x = subject(&elements[i].1, opts);
            let e = estimate_k_cond(&x, &[&elements[j].1], c, None).expect("no mask");
            (e.value_bits, th.approx_zero(&e))
        })
        .collect();

    let mut leq = vec![vec![true; k]; k];
    let mut margins = vec![vec![th.eps_zero; k]; k];
    let mut cond_bits = vec![vec![0; k]; k];
    for (&(i, j), &(bits, v)) in pairs.iter().zip(&estimates) {
        leq[i][j] = v.holds();
        margins[i][j] = v.margin;
        cond_bits[i][j] = bits;
    }
    let relation = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| match (leq[i][j], leq[j][i]) {
                    _ if i == j => Relation::Equivalent,
                    _ if plain[i] && plain[j] => Relation::Indeterminate,
                    (true, true) => Relation::Equivalent,
                    (true, false) => Relation::Precedes,
                    (false, true) => Relation::Succeeds,
                    (false, false) => Relation::Spacelike,
                })
                .collect()
        })
        .collect();

    let names: Vec<String> = elements.iter().map(|(n, _)| n.clone()).collect();
    let mut violations = Vec::new();
    let mut triples_checked = 0;
    for x in 0..k {
        for y in 0..k {
            for z in 0..k {
                if x == y || y == z || x == z {
                    continue;
                }
                triples_checked += 1;
                if leq[x][y] && leq[y][z] && !leq[x][z] {
                    violations.push([names[x].clone(), names[y].clone(), names[z].clone()]);
                }
            }
        }
    }
    Ok(CausalPoset {
        names,
        elements: elements.iter().map(|(_, s)| s.clone()).collect(),
        lengths: elements.iter().map(|(_, s)| s.len()).collect(),
        compressor_id: c.id().to_string(),
        thresholds: *th,
        relation,
        leq,
        margins,
        cond_bits,
        violations,
        triples_checked,
    })
}

impl CausalPoset {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::InvalidArgument(format!("no element named {name:?}")))
    }

    pub fn precedes(&self, x: &str, y: &str) -> Result<bool> {
        Ok(self.leq[self.index(x)?][self.index(y)?])
    }

    pub fn relation_between(&self, x: &str, y: &str) -> Result<Relation> {
        Ok(self.relation[self.index(x)?][self.index(y)?])
    }

    /// Strict causes of element `j`: `i ⪯ j` and not `j ⪯ i`.
    pub fn strict_causes(&self, j: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| i != j && self.leq[i][j] && !self.leq[j][i]).collect()
    }

    fn equivalent(&self, i: usize, j: usize) -> bool {
        self.leq[i][j] && self.leq[j][i]
    }

    /// Class representative: the lexicographically first name among the
    /// elements connected to `i` by estimated equivalence.
    pub fn representative(&self, i: usize) -> String {
        let mut class = vec![i];
        let mut at = 0;
        while at < class.len() {
            let u = class[at];
            for v in 0..self.len() {
                if !class.contains(&v) && self.equivalent(u, v) {
                    class.push(v);
                }
            }
            at += 1;
        }
        class.iter().map(|&v| self.names[v].clone()).min().unwrap()
    }

    pub fn violation_rate(&self) -> f64 {
        if self.triples_checked == 0 {
            0.0
        } else {
            self.violations.len() as f64 / self.triples_checked as f64
        }
    }

    fn check_consistent(&self, involved: &[usize]) -> Result<()> {
        let names: Vec<&String> = involved.iter().map(|&i| &self.names[i]).collect();
        if let Some(v) = self.violations.iter().find(|t| t.iter().any(|n| names.contains(&n))) {
            return Err(Error::OrderInconsistent(format!("{} ⪯ {} ⪯ {} but not {} ⪯ {}", v[0], v[1], v[2], v[0], v[2])));
        }
        Ok(())
    }

    fn bound(&self, subset: &[&str], upper: bool) -> Result<Option<String>> {
        if subset.is_empty() {
            return Err(Error::InvalidArgument("empty subset".into()));
        }
        let members = subset.iter().map(|n| self.index(n)).collect::<Result<Vec<_>>>()?;
        let le = |a: usize, b: usize| if upper { self.leq[a][b] } else { self.leq[b][a] };
        let bounds: Vec<usize> = (0..self.len()).filter(|&z| members.iter().all(|&x| le(x, z))).collect();
        let mut involved = members.clone();
        involved.extend(&bounds);
        self.check_consistent(&involved)?;
        let best: Vec<usize> = bounds.iter().copied().filter(|&y| bounds.iter().all(|&z| le(y, z))).collect();
        let mut reps: Vec<String> = best.iter().map(|&y| self.representative(y)).collect();
        reps.sort();
        reps.dedup();
        Ok(if reps.len() == 1 { reps.pop() } else { None })
    }

    /// First common effect (least upper bound), unique up to equivalence.
    pub fn common_effect(&self, subset: &[&str]) -> Result<Option<String>> {
        self.bound(subset, true)
    }

    /// Last common cause (greatest lower bound), unique up to equivalence.
    pub fn common_cause(&self, subset: &[&str]) -> Result<Option<String>> {
        self.bound(subset, false)
    }

    pub fn detect_extremes(&self) -> Extremes {
        let k = self.len();
        let all: Vec<usize> = (0..k).collect();
        let find = |first: bool| {
            let reps: std::collections::BTreeSet<String> = all
                .iter()
                .copied()
                .filter(|&b| all.iter().all(|&x| if first { self.leq[b][x] } else { self.leq[x][b] }))
                .map(|b| self.representative(b))
                .collect();
            if reps.len() == 1 {
                reps.into_iter().next()
            } else {
                None
            }
        };
        let causeless = all.iter().filter(|&&j| self.strict_causes(j).is_empty()).map(|&j| self.names[j].clone()).collect();
        let effectless = all
            .iter()
            .filter(|&&i| !(0..k).any(|j| j != i && self.leq[i][j] && !self.leq[j][i]))
            .map(|&i| self.names[i].clone())
            .collect();
        Extremes { big_bang: find(true), big_crunch: find(false), causeless, effectless }
    }

    /// Judges `K(y | strict causes of y) ≈ 0` for every element with causes.
    /// Causes enter as separate condition parts in name order.
    pub fn classify_determinism(&self, c: &dyn Compressor) -> Result<Determinism> {
        let th = &self.thresholds;
        let checks: Vec<Result<Option<DeterminismCheck>>> = (0..self.len())
            .into_par_iter()
            .map(|j| {
                let mut causes = self.strict_causes(j);
                if causes.is_empty() {
                    return Ok(None);
                }
                causes.sort_by(|&a, &b| self.names[a].cmp(&self.names[b]));
                let parts: Vec<&BitString> = causes.iter().map(|&i| &self.elements[i]).collect();
                th.check_len(self.elements[j].len())?;
                let e = estimate_k_cond(&self.elements[j], &parts, c, None)?;
                Ok(Some(DeterminismCheck {
                    element: self.names[j].clone(),
                    causes: causes.iter().map(|&i| self.names[i].clone()).collect(),
                    value_bits: e.value_bits,
                    verdict: th.approx_zero(&e),
                }))
            })
            .collect();
        let checks: Vec<DeterminismCheck> = checks.into_iter().filter_map(|r| r.transpose()).collect::<Result<_>>()?;
        let witnesses: Vec<String> = checks.iter().filter(|c| !c.verdict.holds()).map(|c| c.element.clone()).collect();
        Ok(Determinism { deterministic: witnesses.is_empty(), witnesses, checks })
    }

    /// Every deterministic structure with a big bang should be trivial.
    pub fn check_triviality(&self, det: &Determinism) -> TrivialityReport {
        if !det.deterministic {
            return TrivialityReport::Skipped { reason: "probabilistic structure".into() };
        }
        let Some(big_bang) = self.detect_extremes().big_bang else {
            return TrivialityReport::Skipped { reason: "no big bang".into() };
        };
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if !self.equivalent(i, j) {
                    return TrivialityReport::Counterexample {
                        big_bang,
                        pair: [self.names[i].clone(), self.names[j].clone()],
                        margins: [self.margins[i][j], self.margins[j][i]],
                    };
                }
            }
        }
        TrivialityReport::Confirmed { big_bang }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("poset serializes")
    }

    /// Directed graph of strict causes (solid) and equivalences (dashed,
    /// undirected), in name order.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph causal {\n  rankdir=LR;\n");
        for n in &self.names {
            let _ = writeln!(out, "  \"{n}\";");
        }
        for i in 0..self.len() {
            for j in 0..self.len() {
                match self.relation[i][j] {
                    Relation::Precedes => {
                        let _ = writeln!(out, "  \"{}\" -> \"{}\";", self.names[i], self.names[j]);
                    }
                    Relation::Equivalent if i < j => {
                        let _ = writeln!(out, "  \"{}\" -> \"{}\" [dir=none, style=dashed];", self.names[i], self.names[j]);
                    }
                    _ => {}
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extremes {
    pub big_bang: Option<String>,
    pub big_crunch: Option<String>,
    pub causeless: Vec<String>,
    pub effectless: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeterminismCheck {
    pub element: String,
    pub causes: Vec<String>,
    pub value_bits: u64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Determinism {
    pub deterministic: bool,
    pub witnesses: Vec<String>,
    pub checks: Vec<DeterminismCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum TrivialityReport {
    Confirmed { big_bang: String },
    Counterexample { big_bang: String, pair: [String; 2], margins: [f64; 2] },
    Skipped { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CausalDistance {
    pub from: String,
    pub to: String,
    pub value_bits: u64,
}

/// `K(y | x)`: how far `x` lies from the effects of `y`.
pub fn causal_distance(
    x: (&str, &BitString),
    y: (&str, &BitString),
    th: &Thresholds,
    c: &dyn Compressor,
) -> Result<CausalDistance> {
    th.check_len(x.1.len().min(y.1.len()))?;
    let e = estimate_k_cond(y.1, &[x.1], c, None)?;
    Ok(CausalDistance { from: x.0.to_string(), to: y.0.to_string(), value_bits: e.value_bits })
}

/// Names mapped to their relation rows, for compact reports.
pub fn relation_table(p: &CausalPoset) -> BTreeMap<String, BTreeMap<String, Relation>> {
    p.names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), p.names.iter().enumerate().map(|(j, m)| (m.clone(), p.relation[i][j])).collect()))
        .collect()
}

/// Sets of strings all computable from one seeded base string `b`: `b`
/// itself plus transforms among NOT, rotations, `b‖b`, `b‖¬b` and
/// `b‖(prefix of b)`. Each set is deterministic and has a big bang.
pub fn triviality_corpus(count: usize, n: usize, seed: &crate::bits::Seed) -> Vec<Vec<(String, BitString)>> {
    (0..count)
        .map(|i| {
            let b = crate::bits::sample_incompressible(n, &seed.derive(&format!("set-{i}")));
            let rot = 1 + (i * 131) % (n - 1).max(1);
            let all = vec![
                ("not".to_string(), b.not()),
                (format!("rot{rot}"), b.rotate_left(rot)),
                ("twice".to_string(), b.concat(&b)),
                ("with-not".to_string(), b.concat(&b.not())),
                ("with-prefix".to_string(), b.concat(&b.prefix(n / (2 + i % 3)))),
            ];
            let mut set = vec![("b".to_string(), b.clone())];
            // between two and all five transforms, rotated through the list
            let take = 2 + i % 4;
            set.extend((0..take).map(|k| all[(i + k) % all.len()].clone()));
            set
        })
        .collect()
}
