//! Structure function over a fixed family of described models.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};

/// Bits spent naming the model family.
pub const FAMILY_TAG_BITS: u32 = 3;

/// Maximal slope allowed after the sufficiency point is `-1 - SLOPE_TOLERANCE`.
pub const SLOPE_TOLERANCE: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    /// All strings of the length.
    Cube,
    /// The all-zero or all-one string.
    Constant,
    /// Strings with the same number of ones.
    HammingShell,
    /// Strings with the same first bit and number of runs.
    RunProfile,
    /// Strings agreeing with a constant on one interval, free elsewhere.
    IntervalCylinder,
    /// The string itself, spelled out.
    Singleton,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 6] = [
        ModelFamily::Cube,
        ModelFamily::Constant,
        ModelFamily::HammingShell,
        ModelFamily::RunProfile,
        ModelFamily::IntervalCylinder,
        ModelFamily::Singleton,
    ];
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Model {
    Cube { n: usize },
    Constant { n: usize, bit: bool },
    HammingShell { n: usize, weight: usize },
    RunProfile { n: usize, first: bool, runs: usize },
    IntervalCylinder { n: usize, start: usize, end: usize, bit: bool },
    Singleton { bits: String },
}

fn index_bits(n: usize) -> u32 {
    (n + 1).next_power_of_two().trailing_zeros()
}

/// `log2 C(n, k)`, summed term by term.
pub fn log2_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (1..=k).map(|i| ((n - k + i) as f64).log2() - (i as f64).log2()).fold(0.0, |a, b| a + b)
}

impl Model {
    pub fn family(&self) -> ModelFamily {
        match self {
            Model::Cube { .. } => ModelFamily::Cube,
            Model::Constant { .. } => ModelFamily::Constant,
            Model::HammingShell { .. } => ModelFamily::HammingShell,
            Model::RunProfile { .. } => ModelFamily::RunProfile,
            Model::IntervalCylinder { .. } => ModelFamily::IntervalCylinder,
            Model::Singleton { .. } => ModelFamily::Singleton,
        }
    }

    /// Description length: family tag plus parameters. The string length is given.
    pub fn cost_bits(&self) -> u32 {
        FAMILY_TAG_BITS
            + match self {
                Model::Cube { .. } => 0,
                Model::Constant { .. } => 1,
                Model::HammingShell { n, .. } => index_bits(*n),
                Model::RunProfile { n, .. } => 1 + index_bits(*n),
                Model::IntervalCylinder { n, .. } => 2 * index_bits(*n) + 1,
                Model::Singleton { bits } => bits.len() as u32,
            }
    }

    pub fn log_size(&self) -> f64 {
        match *self {
            Model::Cube { n } => n as f64,
            Model::Constant { .. } | Model::Singleton { .. } => 0.0,
            Model::HammingShell { n, weight } => log2_binomial(n, weight),
            Model::RunProfile { n, runs, .. } => log2_binomial(n - 1, runs - 1),
            Model::IntervalCylinder { n, start, end, .. } => (n - (end - start)) as f64,
        }
    }

    pub fn contains(&self, s: &BitString) -> bool {
        match self {
            Model::Cube { n } => s.len() == *n,
            Model::Constant { n, bit } => s.len() == *n && s.iter().all(|b| b == *bit),
            Model::HammingShell { n, weight } => s.len() == *n && s.count_ones() == *weight,
            Model::RunProfile { n, first, runs } => {
                s.len() == *n && s.get(0) == *first && run_lengths(s).len() == *runs
            }
            Model::IntervalCylinder { n, start, end, bit } => {
                s.len() == *n && (*start..*end).all(|i| s.get(i) == *bit)
            }
            Model::Singleton { bits } => s.to_ascii() == *bits,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Cube { n } => write!(f, "cube({n})"),
            Model::Constant { bit, .. } => write!(f, "constant({})", u8::from(*bit)),
            Model::HammingShell { weight, .. } => write!(f, "shell(w={weight})"),
            Model::RunProfile { first, runs, .. } => write!(f, "runs(first={},r={runs})", u8::from(*first)),
            Model::IntervalCylinder { start, end, bit, .. } => {
                write!(f, "cylinder([{start},{end})={})", u8::from(*bit))
            }
            Model::Singleton { .. } => write!(f, "singleton"),
        }
    }
}

fn run_lengths(s: &BitString) -> Vec<(usize, usize, bool)> {
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=s.len() {
        if i == s.len() || s.get(i) != s.get(start) {
            runs.push((start, i, s.get(start)));
            start = i;
        }
    }
    runs
}

/// Registry models of the given families that contain `s`.
pub fn covering_models(s: &BitString, families: &[ModelFamily]) -> Vec<Model> {
    let n = s.len();
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let runs = run_lengths(s);
    for fam in families {
        match fam {
            ModelFamily::Cube => out.push(Model::Cube { n }),
            ModelFamily::Constant => {
                if runs.len() == 1 {
                    out.push(Model::Constant { n, bit: runs[0].2 });
                }
            }
            ModelFamily::HammingShell => out.push(Model::HammingShell { n, weight: s.count_ones() }),
            ModelFamily::RunProfile => out.push(Model::RunProfile { n, first: s.get(0), runs: runs.len() }),
            ModelFamily::IntervalCylinder => {
                for bit in [false, true] {
                    let longest = runs.iter().filter(|r| r.2 == bit).max_by_key(|r| (r.1 - r.0, std::cmp::Reverse(r.0)));
                    if let Some(&(start, end, _)) = longest {
                        out.push(Model::IntervalCylinder { n, start, end, bit });
                    }
                }
            }
            ModelFamily::Singleton => out.push(Model::Singleton { bits: s.to_ascii() }),
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructurePoint {
    pub k: u32,
    pub log_size: f64,
    /// Index into `StructureFunction::models` of the model achieving it.
    pub model: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureFunction {
    pub n: usize,
    pub models: Vec<Model>,
    pub points: Vec<StructurePoint>,
    pub k0: u32,
    pub macrostate: Model,
    pub macrostate_log_size: f64,
    /// `n - cost(M) - log|M|` for the macrostate.
    pub fuel_bound_bits: f64,
}

impl StructureFunction {
    pub fn log_size_at(&self, k: u32) -> Option<f64> {
        self.points.iter().rev().find(|p| p.k <= k).map(|p| p.log_size)
    }

    /// `k0 + log|M_k0|`, the two-part description length at the sufficiency point.
    pub fn two_part_bits(&self) -> f64 {
        self.k0 as f64 + self.macrostate_log_size
    }
}

/// For every budget `k` from the cheapest model cost up to the most expensive,
/// the smallest covering model of cost at most `k`, and the sufficiency point:
/// the first `k` after which the curve never falls faster than slope
/// `-1 - SLOPE_TOLERANCE`.
pub fn structure_function(s: &BitString, families: &[ModelFamily]) -> Result<StructureFunction> {
    let models = covering_models(s, families);
    if models.is_empty() {
        return Err(Error::NoCoveringModel);
    }
    let min_cost = models.iter().map(Model::cost_bits).min().unwrap();
    let max_cost = models.iter().map(Model::cost_bits).max().unwrap();
    let sizes: Vec<f64> = models.iter().map(Model::log_size).collect();
    let mut points = Vec::with_capacity((max_cost - min_cost + 1) as usize);
    for k in min_cost..=max_cost {
        let best = (0..models.len())
            .filter(|&i| models[i].cost_bits() <= k)
            .min_by(|&i, &j| sizes[i].total_cmp(&sizes[j]).then(models[i].cost_bits().cmp(&models[j].cost_bits())))
            .unwrap();
        points.push(StructurePoint { k, log_size: sizes[best], model: best });
    }

    // h(k') + (1 + tol) k' >= h(k) + (1 + tol) k for every k' > k.
    let slope = 1.0 + SLOPE_TOLERANCE;
    let lifted: Vec<f64> = points.iter().map(|p| p.log_size + slope * p.k as f64).collect();
    let mut suffix_min = vec![f64::INFINITY; lifted.len() + 1];
    for i in (0..lifted.len()).rev() {
        suffix_min[i] = suffix_min[i + 1].min(lifted[i]);
    }
    let at = (0..points.len()).find(|&i| suffix_min[i + 1] >= lifted[i] - 1e-9).unwrap();
    let p = points[at];
    let macrostate = models[p.model].clone();
    let fuel_bound_bits = (s.len() as f64 - macrostate.cost_bits() as f64 - p.log_size).max(0.0);
    Ok(StructureFunction {
        n: s.len(),
        models,
        points,
        k0: p.k,
        macrostate,
        macrostate_log_size: p.log_size,
        fuel_bound_bits,
    })
}
