//! Reversible tape machine, work extraction and the complexity form of the
//! second law.

mod machine;
mod structure;

pub use machine::*;
pub use structure::*;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{BitString, Seed};
use crate::complexity::{estimate_k, estimate_k_cond};
use crate::compress::Compressor;
use crate::error::{Error, Result};

pub const BOLTZMANN: f64 = 1.380649e-23;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Physics {
    pub temperature_k: f64,
}

impl Default for Physics {
    fn default() -> Self {
        Physics { temperature_k: 300.0 }
    }
}

impl Physics {
    /// Work per bit, `kT ln 2`, in joules.
    pub fn kt_ln2(&self) -> f64 {
        BOLTZMANN * self.temperature_k * std::f64::consts::LN_2
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuelReport {
    pub len_s: usize,
    pub lower_bound_bits: u64,
    pub upper_bound_bits: u64,
    pub extracted_zeros: Option<usize>,
    pub temperature_k: f64,
    pub work_per_bit_j: f64,
    pub lower_bound_j: f64,
    pub upper_bound_j: f64,
}

/// Bounds on the zeros extractable from `s` given `x`: `len(s)` minus the
/// compressed length of `s` with helper `x`, and `len(s)` minus `K(s|x)`.
pub fn fuel_bounds(s: &BitString, x: &BitString, c: &dyn Compressor, physics: &Physics) -> FuelReport {
    let n = s.len() as u64;
    let helper: Vec<&BitString> = if x.is_empty() { vec![] } else { vec![x] };
    let (compressed, cond) =
        rayon::join(|| c.compressed_bits(&helper, &[s]), || estimate_k_cond(s, &[x], c, None).expect("no mask"));
    let lower = n.saturating_sub(compressed.min(n));
    let upper = n.saturating_sub(cond.value_bits.min(n));
    let w = physics.kt_ln2();
    FuelReport {
        len_s: s.len(),
        lower_bound_bits: lower,
        upper_bound_bits: upper,
        extracted_zeros: None,
        temperature_k: physics.temperature_k,
        work_per_bit_j: w,
        lower_bound_j: lower as f64 * w,
        upper_bound_j: upper as f64 * w,
    }
}

/// Tape `[S | X | copy | history]` for copy-and-uncompute extraction.
///
/// Generator programs address the region `[X | copy | history]` starting at 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BennettTape {
    tape: BitString,
    s_len: usize,
    x_len: usize,
    history_len: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BennettOutcome {
    pub extracted_zeros: usize,
    pub transcript: Vec<Gate>,
}

impl BennettTape {
    pub fn new(s: &BitString, x: &BitString, history_len: usize) -> Self {
        let mut tape = s.concat(x);
        tape.extend(&BitString::zeros(s.len() + history_len));
        BennettTape { tape, s_len: s.len(), x_len: x.len(), history_len }
    }

    pub fn tape(&self) -> &BitString {
        &self.tape
    }

    pub fn s_region(&self) -> BitString {
        self.tape.slice(0, self.s_len)
    }

    pub fn x_region(&self) -> BitString {
        self.tape.slice(self.s_len, self.s_len + self.x_len)
    }

    pub fn copy_region(&self) -> BitString {
        let at = self.s_len + self.x_len;
        self.tape.slice(at, at + self.s_len)
    }

    pub fn history_region(&self) -> BitString {
        self.tape.slice(self.tape.len() - self.history_len, self.tape.len())
    }

    /// Width of the region generator programs address.
    pub fn work_width(&self) -> usize {
        self.x_len + self.s_len + self.history_len
    }

    /// Runs the generator, XORs its copy into S, then runs the generator
    /// backwards. On a wrong copy the generator is undone and nothing changes.
    pub fn extract(&mut self, generator: &[Gate]) -> Result<BennettOutcome> {
        for g in generator {
            g.validate(self.work_width())?;
        }
        let forward: Vec<Gate> = generator.iter().map(|g| g.shifted(self.s_len)).collect();
        let mut m = ReversibleMachine::new(self.tape.clone(), forward.clone())?;
        m.run_silent();
        let copy_at = self.s_len + self.x_len;
        if let Some(first_diff) = (0..self.s_len).find(|&i| m.tape().get(copy_at + i) != self.tape.get(i)) {
            let restored = m.invert();
            debug_assert_eq!(restored, self.tape);
            return Err(Error::GeneratorMismatch { first_diff });
        }
        let mut transcript = forward.clone();
        transcript.extend((0..self.s_len).map(|i| Gate::Cnot(copy_at + i, i)));
        transcript.extend(forward.iter().rev());
        let mut m = ReversibleMachine::new(self.tape.clone(), transcript.clone())?;
        m.run_silent();
        self.tape = m.tape().clone();
        Ok(BennettOutcome { extracted_zeros: self.s_len, transcript })
    }
}

/// Generator writing X into the copy region with one CNOT per bit.
pub fn copy_generator(len: usize) -> Vec<Gate> {
    (0..len).map(|i| Gate::Cnot(i, len + i)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondLawParams {
    /// Coefficient of `log2(t2 - t1)`.
    pub slope: f64,
    pub slack: f64,
}

impl Default for SecondLawParams {
    fn default() -> Self {
        SecondLawParams { slope: 8.0, slack: 128.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawViolation {
    pub t1: usize,
    pub t2: usize,
    pub k1: u64,
    pub k2: u64,
    /// Amount by which `K(t1)` exceeds the allowed bound.
    pub excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondLawReport {
    pub params: SecondLawParams,
    /// `(step, K̂)` per snapshot.
    pub complexities: Vec<(usize, u64)>,
    pub pairs_checked: u64,
    pub violation_count: u64,
    /// Smallest `K(t2) + slope log2(t2 - t1) + slack - K(t1)`; negative means a violation.
    pub worst_margin: f64,
    /// Up to `MAX_LISTED_VIOLATIONS` violations, worst first.
    pub violations: Vec<LawViolation>,
}

pub const MAX_LISTED_VIOLATIONS: usize = 100;

/// Checks `K(tape_t1) <= K(tape_t2) + slope log2(t2 - t1) + slack` for every
/// pair of snapshots with `t1 < t2`.
pub fn second_law_audit(trace: &Trace, c: &dyn Compressor, params: SecondLawParams) -> SecondLawReport {
    let ks: Vec<(usize, u64)> =
        trace.snapshots.par_iter().map(|(t, tape)| (*t, estimate_k(tape, c).value_bits)).collect();
    let per_row: Vec<(u64, f64, Vec<LawViolation>)> = (0..ks.len())
        .into_par_iter()
        .map(|i| {
            let (t1, k1) = ks[i];
            let mut worst = f64::INFINITY;
            let mut pairs = 0;
            let mut found = Vec::new();
            for &(t2, k2) in &ks[i + 1..] {
                if t2 <= t1 {
                    continue;
                }
                pairs += 1;
                let margin = k2 as f64 + params.slope * ((t2 - t1) as f64).log2() + params.slack - k1 as f64;
                worst = worst.min(margin);
                if margin < 0.0 {
                    found.push(LawViolation { t1, t2, k1, k2, excess: -margin });
                }
            }
            (pairs, worst, found)
        })
        .collect();
    let pairs_checked = per_row.iter().map(|r| r.0).sum();
    let worst_margin = per_row.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let mut violations: Vec<LawViolation> = per_row.into_iter().flat_map(|r| r.2).collect();
    let violation_count = violations.len() as u64;
    violations.sort_by(|a, b| b.excess.total_cmp(&a.excess).then((a.t1, a.t2).cmp(&(b.t1, b.t2))));
    violations.truncate(MAX_LISTED_VIOLATIONS);
    SecondLawReport { params, complexities: ks, pairs_checked, violation_count, worst_margin, violations }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandauerReport {
    pub k_a: u64,
    pub k_b: u64,
    /// `K(A) - K(B)`: positive is a minimum cost of `A -> B`, negative a maximum release.
    pub bits: i64,
    pub joules: f64,
}

pub fn landauer_ledger(a: &BitString, b: &BitString, c: &dyn Compressor, physics: &Physics) -> LandauerReport {
    let (ka, kb) = rayon::join(|| estimate_k(a, c).value_bits, || estimate_k(b, c).value_bits);
    let bits = ka as i64 - kb as i64;
    LandauerReport { k_a: ka, k_b: kb, bits, joules: bits as f64 * physics.kt_ln2() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingFrame {
    pub step: usize,
    pub k_hat: u64,
    pub k0: u32,
    pub macrostate: String,
    pub macrostate_log_size: f64,
}

/// Two species on a line, initially separated, mixed by seeded swaps of
/// adjacent cells. Returns `frames + 1` evenly spaced frames including both ends.
pub fn mixing_demo(
    n: usize,
    steps: usize,
    frames: usize,
    seed: &Seed,
    families: &[ModelFamily],
    c: &dyn Compressor,
) -> Result<Vec<MixingFrame>> {
    if n < 2 || frames == 0 {
        return Err(Error::InvalidArgument("mixing demo needs n >= 2 and at least one frame".into()));
    }
    let mut cells: Vec<bool> = (0..n).map(|i| i < n / 2).collect();
    let mut rng = seed.rng();
    let mut snapshots = vec![(0, BitString::from_fn(n, |i| cells[i]))];
    for f in 1..=frames {
        let until = steps * f / frames;
        for _ in snapshots.last().unwrap().0..until {
            let i = rng.random_range(0..n - 1);
            cells.swap(i, i + 1);
        }
        snapshots.push((until, BitString::from_fn(n, |i| cells[i])));
    }
    snapshots
        .par_iter()
        .map(|(step, s)| {
            let sf = structure_function(s, families)?;
            Ok(MixingFrame {
                step: *step,
                k_hat: estimate_k(s, c).value_bits,
                k0: sf.k0,
                macrostate: sf.macrostate.to_string(),
                macrostate_log_size: sf.macrostate_log_size,
            })
        })
        .collect()
}
