use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{combo_name, GlobalRelation, LocalOp};
use crate::bits::{sample_incompressible, BitString, Seed};
use crate::complexity::{estimate_k, estimate_k_cond, Outcome, Thresholds, Verdict};
use crate::compress::Compressor;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Party {
    pub name: String,
    pub input: BitString,
    pub output: BitString,
    /// Two bits per round selecting the local operation.
    pub control: BitString,
}

impl Party {
    pub fn rounds(&self) -> usize {
        self.input.len()
    }

    pub fn local_op(&self, round: usize) -> LocalOp {
        LocalOp::from_control(self.control.get(2 * round), self.control.get(2 * round + 1))
    }
}

/// `A`, `B`, ... for `k <= 26`, then `P26`, `P27`, ...
pub fn party_names(k: usize) -> Vec<String> {
    (0..k).map(|j| if j < 26 { ((b'A' + j as u8) as char).to_string() } else { format!("P{j}") }).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub relation: GlobalRelation,
    pub parties: Vec<Party>,
    /// Rounds whose combination had more than one fixed point.
    pub probabilistic_rounds: usize,
}

#[derive(Serialize, Deserialize)]
struct ScenarioHeader {
    k: usize,
    rounds: usize,
    parties: Vec<String>,
    relation: GlobalRelation,
    probabilistic_rounds: usize,
}

impl Scenario {
    pub fn rounds(&self) -> usize {
        self.parties.first().map_or(0, Party::rounds)
    }

    pub fn party(&self, name: &str) -> Option<&Party> {
        self.parties.iter().find(|p| p.name == name)
    }

    /// Output vector realized in `round`, bit `j` for party `j`.
    pub fn outputs_at(&self, round: usize) -> u32 {
        self.parties.iter().enumerate().map(|(j, p)| u32::from(p.output.get(round)) << j).sum()
    }

    pub fn inputs_at(&self, round: usize) -> u32 {
        self.parties.iter().enumerate().map(|(j, p)| u32::from(p.input.get(round)) << j).sum()
    }

    pub fn combo_at(&self, round: usize) -> Vec<LocalOp> {
        self.parties.iter().map(|p| p.local_op(round)).collect()
    }

    /// A JSON header line, then control, input and output lines for each party.
    pub fn to_text(&self) -> String {
        let header = ScenarioHeader {
            k: self.parties.len(),
            rounds: self.rounds(),
            parties: self.parties.iter().map(|p| p.name.clone()).collect(),
            relation: self.relation.clone(),
            probabilistic_rounds: self.probabilistic_rounds,
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for p in &self.parties {
            out.push_str(&format!("{}\n{}\n{}\n", p.control, p.input, p.output));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: ScenarioHeader =
            serde_json::from_str(lines.next().ok_or_else(|| Error::MalformedFile("empty scenario file".into()))?)?;
        if header.parties.len() != header.k || header.relation.k() != header.k {
            return Err(Error::MalformedFile("party count disagrees with the relation".into()));
        }
        let mut next = || -> Result<BitString> {
            BitString::parse(lines.next().ok_or_else(|| Error::MalformedFile("scenario file is truncated".into()))?)
        };
        let mut parties = Vec::with_capacity(header.k);
        for name in header.parties {
            let (control, input, output) = (next()?, next()?, next()?);
            if input.len() != header.rounds || output.len() != header.rounds || control.len() != 2 * header.rounds {
                return Err(Error::MalformedFile(format!("party {name} has strings of the wrong length")));
            }
            parties.push(Party { name, input, output, control });
        }
        Ok(Scenario { relation: header.relation, parties, probabilistic_rounds: header.probabilistic_rounds })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Scenario::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Runs `rounds` repetitions with control strings drawn from child seeds named
/// after the parties.
pub fn run_scenario(g: &GlobalRelation, seed: &Seed, rounds: usize) -> Result<Scenario> {
    let controls = party_names(g.k()).iter().map(|name| sample_incompressible(2 * rounds, &seed.derive(name))).collect();
    run_scenario_with_controls(g, controls, &seed.derive("select"))
}

/// Each round takes a fixed point of the combination selected by the control
/// bits; among several, one is picked uniformly from the word stream of
/// `select` positioned at the round, so chunked execution replays exactly.
pub fn run_scenario_with_controls(g: &GlobalRelation, controls: Vec<BitString>, select: &Seed) -> Result<Scenario> {
    let k = g.k();
    if controls.len() != k {
        return Err(Error::LengthMismatch { left: controls.len(), right: k });
    }
    let rounds = controls[0].len() / 2;
    for c in &controls {
        if c.len() != 2 * rounds {
            return Err(Error::LengthMismatch { left: c.len(), right: 2 * rounds });
        }
    }
    const CHUNK: usize = 4096;
    let chunks: Vec<Result<(Vec<(u32, u32)>, usize)>> = (0..rounds.div_ceil(CHUNK))
        .into_par_iter()
        .map(|ci| {
            let mut rng = select.rng();
            let mut out = Vec::with_capacity(CHUNK);
            let mut multi = 0;
            let mut fps = Vec::with_capacity(1 << k);
            for round in ci * CHUNK..((ci + 1) * CHUNK).min(rounds) {
                let combo: Vec<LocalOp> =
                    controls.iter().map(|c| LocalOp::from_control(c.get(2 * round), c.get(2 * round + 1))).collect();
                fps.clear();
                fps.extend((0..1u32 << k).filter(|&o| {
                    let inp = g.apply(o);
                    combo.iter().enumerate().all(|(j, op)| op.apply((inp >> j) & 1 == 1) == ((o >> j) & 1 == 1))
                }));
                let o = match fps.len() {
                    0 => return Err(Error::InconsistentRelation { round, combo: combo_name(&combo) }),
                    1 => fps[0],
                    len => {
                        multi += 1;
                        rng.set_word_pos((round as u128) << 4);
                        fps[rng.random_range(0..len)]
                    }
                };
                out.push((o, g.apply(o)));
            }
            Ok((out, multi))
        })
        .collect();
    let mut realized = Vec::with_capacity(rounds);
    let mut probabilistic_rounds = 0;
    for chunk in chunks {
        let (v, m) = chunk?;
        realized.extend(v);
        probabilistic_rounds += m;
    }
    let parties = party_names(k)
        .into_iter()
        .zip(controls)
        .enumerate()
        .map(|(j, (name, control))| Party {
            name,
            input: BitString::from_fn(rounds, |r| (realized[r].1 >> j) & 1 == 1),
            output: BitString::from_fn(rounds, |r| (realized[r].0 >> j) & 1 == 1),
            control,
        })
        .collect();
    Ok(Scenario { relation: g.clone(), parties, probabilistic_rounds })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CausalStatus {
    Precedes,
    Not,
    Indeterminate,
}

impl From<Outcome> for CausalStatus {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::Holds => CausalStatus::Precedes,
            Outcome::Fails => CausalStatus::Not,
            Outcome::Indeterminate => CausalStatus::Indeterminate,
        }
    }
}

/// Whether the outputs of `past` are in the causal past of `future`'s input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupRelation {
    pub past: Vec<String>,
    pub future: String,
    pub status: CausalStatus,
    pub verdict: Verdict,
    /// `K̂(future input)`.
    pub k_input: u64,
    /// `K̂(future input | past outputs)`.
    pub k_input_given_past: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CausalRelationMatrix {
    pub parties: Vec<String>,
    /// `pairs[i][j]` is the status of party `i` preceding party `j`; the diagonal is `not`.
    pub pairs: Vec<Vec<CausalStatus>>,
    /// Every nonempty set of other parties, for every party.
    pub groups: Vec<GroupRelation>,
}

impl CausalRelationMatrix {
    pub fn precedes(&self, past: &str, future: &str) -> bool {
        self.group(&[past], future).is_some_and(|g| g.status == CausalStatus::Precedes)
    }

    pub fn group(&self, past: &[&str], future: &str) -> Option<&GroupRelation> {
        let mut want: Vec<&str> = past.to_vec();
        want.sort_unstable();
        self.groups.iter().find(|g| g.future == future && g.past.iter().map(String::as_str).eq(want.iter().copied()))
    }
}

/// `S ⪯ B` when `B`'s input is not approximately zero and conditioning it on
/// the outputs of `S` (name order) saves at least `eps_dep` of its length.
pub fn derive_causal_relations(
    parties: &[Party],
    th: &Thresholds,
    c: &dyn Compressor,
) -> Result<CausalRelationMatrix> {
    let k = parties.len();
    let rounds = parties.first().map_or(0, Party::rounds);
    if k > 0 {
        th.check_len(rounds)?;
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| parties[a].name.cmp(&parties[b].name));
    let k_inputs: Vec<u64> = parties.par_iter().map(|p| estimate_k(&p.input, c).value_bits).collect();
    let queries: Vec<(usize, Vec<usize>)> = (0..k)
        .flat_map(|j| {
            let others: Vec<usize> = order.iter().copied().filter(|&i| i != j).collect();
            (1..1usize << others.len()).map(move |mask| {
                let past: Vec<usize> = others.iter().enumerate().filter(|(b, _)| (mask >> b) & 1 == 1).map(|(_, &i)| i).collect();
                (j, past)
            })
        })
        .collect();
    let groups: Vec<GroupRelation> = queries
        .par_iter()
        .map(|(j, past)| {
            let future = &parties[*j];
            let cond: Vec<&BitString> = past.iter().map(|&i| &parties[i].output).collect();
            let given = estimate_k_cond(&future.input, &cond, c, None)?.value_bits;
            let n = rounds.max(1) as f64;
            let uncomputable = Verdict::from_margin(k_inputs[*j] as f64 / n - th.eps_zero);
            let dependent = Verdict::from_margin(k_inputs[*j].saturating_sub(given) as f64 / n - th.eps_dep);
            let verdict = Verdict::all(&[uncomputable, dependent]);
            Ok(GroupRelation {
                past: past.iter().map(|&i| parties[i].name.clone()).collect(),
                future: future.name.clone(),
                status: verdict.outcome.into(),
                verdict,
                k_input: k_inputs[*j],
                k_input_given_past: given,
            })
        })
        .collect::<Result<_>>()?;
    let mut pairs = vec![vec![CausalStatus::Not; k]; k];
    for g in groups.iter().filter(|g| g.past.len() == 1) {
        let i = parties.iter().position(|p| p.name == g.past[0]).unwrap();
        let j = parties.iter().position(|p| p.name == g.future).unwrap();
        pairs[i][j] = g.status;
    }
    Ok(CausalRelationMatrix { parties: parties.iter().map(|p| p.name.clone()).collect(), pairs, groups })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioClass {
    Causal,
    NonCausal,
}

/// Causal when some party has no set of other parties in its causal past.
pub fn classify_scenario(m: &CausalRelationMatrix) -> ScenarioClass {
    let has_past = |name: &String| m.groups.iter().any(|g| &g.future == name && g.status == CausalStatus::Precedes);
    if m.parties.iter().all(has_past) && !m.parties.is_empty() {
        ScenarioClass::NonCausal
    } else {
        ScenarioClass::Causal
    }
}
