//! Compression-based complexity estimates and thresholded judgments.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::compress::Compressor;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    Plain,
    Conditional,
    MaskedConditional,
    Joint,
    Mutual,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityEstimate {
    pub value_bits: u64,
    /// Subject length in bits.
    pub n: usize,
    pub compressor_id: String,
    pub kind: EstimateKind,
}

impl ComplexityEstimate {
    pub fn ratio(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.value_bits as f64 / self.n as f64
        }
    }
}

fn estimate(c: &dyn Compressor, value_bits: u64, n: usize, kind: EstimateKind) -> ComplexityEstimate {
    ComplexityEstimate { value_bits, n, compressor_id: c.id().to_string(), kind }
}

/// Compressed length of the segments in order, with no side information.
pub fn compressed_len(parts: &[&BitString], c: &dyn Compressor) -> u64 {
    c.compressed_bits(&[], parts)
}

pub fn estimate_k(s: &BitString, c: &dyn Compressor) -> ComplexityEstimate {
    let bits = compressed_len(&[s], c).min(s.len() as u64);
    estimate(c, bits, s.len(), EstimateKind::Plain)
}

/// Joint estimate `K(s_1, ..., s_k)`, clipped to the total length.
pub fn estimate_k_joint(parts: &[&BitString], c: &dyn Compressor) -> ComplexityEstimate {
    let n: usize = parts.iter().map(|p| p.len()).sum();
    let bits = compressed_len(parts, c).min(n as u64);
    estimate(c, bits, n, EstimateKind::Joint)
}

/// `K(x | y_1, ..., y_k)` as `C(y.., x) - C(y..)`, or, with a mask, the plain
/// estimate of `x` restricted to the masked positions.
///
/// An empty condition (no parts, or only empty parts) gives `estimate_k(x)`.
pub fn estimate_k_cond(
    x: &BitString,
    cond: &[&BitString],
    c: &dyn Compressor,
    mask: Option<&[usize]>,
) -> Result<ComplexityEstimate> {
    if let Some(mask) = mask {
        let restricted = x.select(mask)?;
        let bits = if restricted.is_empty() { 0 } else { compressed_len(&[&restricted], c).min(restricted.len() as u64) };
        return Ok(estimate(c, bits, x.len(), EstimateKind::MaskedConditional));
    }
    let cond: Vec<&BitString> = cond.iter().copied().filter(|p| !p.is_empty()).collect();
    if cond.is_empty() {
        let plain = estimate_k(x, c);
        return Ok(ComplexityEstimate { kind: EstimateKind::Conditional, ..plain });
    }
    let mut joint = cond.clone();
    joint.push(x);
    let (with, without) = rayon::join(|| compressed_len(&joint, c), || compressed_len(&cond, c));
    let bits = with.saturating_sub(without).min(x.len() as u64);
    Ok(estimate(c, bits, x.len(), EstimateKind::Conditional))
}

/// `I_K(x; y) = K(x) - K(x|y)`, clipped at zero.
pub fn mutual_info_k(x: &BitString, y: &BitString, c: &dyn Compressor) -> ComplexityEstimate {
    let (plain, cond) = rayon::join(|| estimate_k(x, c), || estimate_k_cond(x, &[y], c, None));
    let cond = cond.expect("no mask");
    estimate(c, plain.value_bits.saturating_sub(cond.value_bits), x.len(), EstimateKind::Mutual)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub eps_zero: f64,
    pub eps_incomp: f64,
    pub eps_dep: f64,
    pub n_min: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { eps_zero: 0.05, eps_incomp: 0.90, eps_dep: 0.05, n_min: 1 << 12 }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.eps_zero && self.eps_zero < self.eps_incomp && self.eps_incomp <= 1.0;
        if !ok || self.n_min < 1 || !(self.eps_dep > 0.0) {
            return Err(Error::InvalidArgument(format!("thresholds out of range: {self:?}")));
        }
        Ok(())
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        if n < self.n_min {
            return Err(Error::TooShort { n, n_min: self.n_min });
        }
        Ok(())
    }

    pub fn approx_zero(&self, e: &ComplexityEstimate) -> Verdict {
        Verdict::from_margin(self.eps_zero - e.ratio())
    }

    pub fn incompressible(&self, e: &ComplexityEstimate) -> Verdict {
        Verdict::from_margin(e.ratio() - self.eps_incomp)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Holds,
    Fails,
    /// Both compared quantities are themselves close to zero.
    Indeterminate,
}

/// A thresholded judgment. `margin` is the signed distance to the threshold
/// in ratio units, positive when the relation holds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub margin: f64,
}

impl Verdict {
    pub fn from_margin(margin: f64) -> Self {
        Verdict { outcome: if margin >= 0.0 { Outcome::Holds } else { Outcome::Fails }, margin }
    }

    pub fn holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }

    /// Combines verdicts that must all hold; the margin is the smallest one.
    pub fn all(verdicts: &[Verdict]) -> Verdict {
        let margin = verdicts.iter().map(|v| v.margin).fold(f64::INFINITY, f64::min);
        let outcome = if verdicts.iter().any(|v| v.outcome == Outcome::Fails) {
            Outcome::Fails
        } else if verdicts.iter().any(|v| v.outcome == Outcome::Indeterminate) {
            Outcome::Indeterminate
        } else {
            Outcome::Holds
        };
        Verdict { outcome, margin }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Judgment<'a> {
    ApproxZero(&'a BitString),
    Incompressible(&'a BitString),
    Independent(&'a BitString, &'a BitString),
    /// `a` and `b` independent given `c`.
    CondIndependent(&'a BitString, &'a BitString, &'a BitString),
}

pub fn judge(j: Judgment<'_>, th: &Thresholds, c: &dyn Compressor) -> Result<Verdict> {
    match j {
        Judgment::ApproxZero(s) => {
            th.check_len(s.len())?;
            Ok(th.approx_zero(&estimate_k(s, c)))
        }
        Judgment::Incompressible(s) => {
            th.check_len(s.len())?;
            Ok(th.incompressible(&estimate_k(s, c)))
        }
        Judgment::Independent(a, b) => {
            th.check_len(a.len().min(b.len()))?;
            let (ka, (kb, kab)) =
                rayon::join(|| compressed_len(&[a], c), || rayon::join(|| compressed_len(&[b], c), || compressed_len(&[a, b], c)));
            Ok(dependence_verdict(ka.min(a.len() as u64), kb.min(b.len() as u64), kab, a.len(), b.len(), th))
        }
        Judgment::CondIndependent(a, b, cond) => {
            th.check_len(a.len().min(b.len()))?;
            let (ka, (kb, kab)) = rayon::join(
                || estimate_k_cond(a, &[cond], c, None),
                || rayon::join(|| estimate_k_cond(b, &[cond], c, None), || joint_cond(a, b, cond, c)),
            );
            Ok(dependence_verdict(ka?.value_bits, kb?.value_bits, kab, a.len(), b.len(), th))
        }
    }
}

fn joint_cond(a: &BitString, b: &BitString, cond: &BitString, c: &dyn Compressor) -> u64 {
    if cond.is_empty() {
        return compressed_len(&[a, b], c);
    }
    compressed_len(&[cond, a, b], c).saturating_sub(compressed_len(&[cond], c))
}

/// `K(a) + K(b) - K(a,b)` against `eps_dep`, normalized by the shorter length.
fn dependence_verdict(ka: u64, kb: u64, kab: u64, na: usize, nb: usize, th: &Thresholds) -> Verdict {
    let n = na.min(nb).max(1) as f64;
    let info = (ka + kb).saturating_sub(kab) as f64 / n;
    let margin = th.eps_dep - info;
    if (ka as f64) < th.eps_zero * na as f64 && (kb as f64) < th.eps_zero * nb as f64 {
        return Verdict { outcome: Outcome::Indeterminate, margin };
    }
    Verdict::from_margin(margin)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub n: usize,
    pub value_bits: u64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub points: Vec<ProfilePoint>,
    /// Least-squares slope of estimated bits against n.
    pub slope: f64,
    pub intercept: f64,
}

pub fn complexity_profile(
    lengths: &[usize],
    producer: impl Fn(usize) -> BitString + Sync,
    c: &dyn Compressor,
) -> Result<Profile> {
    if lengths.len() < 3 || lengths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("profile needs at least 3 strictly increasing lengths".into()));
    }
    let points: Vec<ProfilePoint> = lengths
        .par_iter()
        .map(|&n| {
            let e = estimate_k(&producer(n), c);
            ProfilePoint { n, value_bits: e.value_bits, ratio: e.ratio() }
        })
        .collect();
    let (slope, intercept) = least_squares(&points.iter().map(|p| (p.n as f64, p.value_bits as f64)).collect::<Vec<_>>());
    Ok(Profile { points, slope, intercept })
}

pub fn least_squares(xy: &[(f64, f64)]) -> (f64, f64) {
    let k = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / k;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    (slope, my - slope * mx)
}
