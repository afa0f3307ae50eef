//! Closed-form per-sample and aggregate calibration scores.
//!
//! The entropic calibration difference (ECD) of a prediction is its negative
//! entropy minus the log-likelihood it assigns to the observed outcome. For a
//! binary prediction `p` with label `x` this collapses to
//! `(p - x) * ln(p / (1 - p))`: zero at `p = 0.5`, positive when the
//! prediction leans towards the wrong class (over-confidence) and bounded
//! below by about `-0.2785` when it leans correctly but not all the way
//! (under-confidence).
//!
//! All logarithms are natural. Probabilities are clipped to
//! `[epsilon, 1 - epsilon]` only inside logarithmic terms; the Brier score
//! and the binning statistics see raw probabilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::summation::pairwise_mean;

/// One estimated positive-class probability paired with its true binary label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    prob: f64,
    label: u8,
}

impl PredictionRecord {
    /// Validates `prob ∈ [0, 1]` and `label ∈ {0, 1}`. Saturated
    /// probabilities (exactly 0 or 1) are accepted.
    pub fn new(prob: f64, label: i64) -> Result<Self> {
        if !(0.0..=1.0).contains(&prob) {
            return Err(Error::ProbabilityOutOfRange(prob));
        }
        match label {
            0 | 1 => Ok(Self {
                prob,
                label: label as u8,
            }),
            other => Err(Error::InvalidLabel(other)),
        }
    }

    pub fn prob(&self) -> f64 {
        self.prob
    }

    pub fn label(&self) -> u8 {
        self.label
    }

    pub fn is_positive(&self) -> bool {
        self.label == 1
    }
}

/// An ordered collection of prediction records.
///
/// Construction never fails on emptiness; aggregate metrics reject an empty
/// dataset with [`Error::EmptyDataset`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Dataset {
    records: Vec<PredictionRecord>,
}

impl Dataset {
    pub fn new(records: Vec<PredictionRecord>) -> Self {
        Self { records }
    }

    /// Builds a dataset from parallel probability and label slices.
    pub fn from_pairs(probs: &[f64], labels: &[i64]) -> Result<Self> {
        if probs.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: probs.len(),
                right: labels.len(),
            });
        }
        probs
            .iter()
            .zip(labels)
            .map(|(&p, &l)| PredictionRecord::new(p, l))
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn records(&self) -> &[PredictionRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PredictionRecord> {
        self.records.iter()
    }

    fn ensure_non_empty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptyDataset)
        } else {
            Ok(())
        }
    }
}

impl FromIterator<PredictionRecord> for Dataset {
    fn from_iter<I: IntoIterator<Item = PredictionRecord>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a PredictionRecord;
    type IntoIter = std::slice::Iter<'a, PredictionRecord>;

    fn into_iter(self) -> Self::IntoIter {
        self.records.iter()
    }
}

/// Probability vector over `K >= 2` classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    const SUM_TOLERANCE: f64 = 1e-9;

    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidDistribution(format!(
                "need at least 2 classes, got {}",
                probs.len()
            )));
        }
        if let Some(&bad) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidDistribution(format!(
                "entry {bad} outside [0, 1]"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}, not 1"
            )));
        }
        Ok(Self { probs })
    }

    /// The two-class distribution `(1 - p, p)` for a positive-class probability.
    pub fn binary(p: f64) -> Result<Self> {
        Self::new(vec![1.0 - p, p])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_classes(&self) -> usize {
        self.probs.len()
    }
}

/// Clip bound applied inside logarithmic terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClipPolicy {
    epsilon: f64,
}

impl ClipPolicy {
    pub const DEFAULT_EPSILON: f64 = 1e-4;

    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon > 0.0 && epsilon < 0.5 {
            Ok(Self { epsilon })
        } else {
            Err(Error::InvalidClip(epsilon))
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

impl Default for ClipPolicy {
    fn default() -> Self {
        Self {
            epsilon: Self::DEFAULT_EPSILON,
        }
    }
}

/// Clamps `p` into `[epsilon, 1 - epsilon]`.
pub fn clip_probability(p: f64, policy: ClipPolicy) -> f64 {
    p.clamp(policy.epsilon, 1.0 - policy.epsilon)
}

/// Per-sample binary ECD: `(p - x) * ln(p / (1 - p))` on the clipped probability.
pub fn ecd_sample_binary(prob: f64, label: u8, policy: ClipPolicy) -> f64 {
    let p = clip_probability(prob, policy);
    (p - f64::from(label)) * (p / (1.0 - p)).ln()
}

/// Mean per-sample binary ECD over the dataset.
pub fn ecd_binary(data: &Dataset, policy: ClipPolicy) -> Result<f64> {
    data.ensure_non_empty()?;
    let scores: Vec<f64> = data
        .iter()
        .map(|r| ecd_sample_binary(r.prob, r.label, policy))
        .collect();
    Ok(pairwise_mean(&scores).expect("non-empty"))
}

/// `Σ p_k ln p_k` over the clipped entries. Always `<= 0`.
pub fn negative_entropy(dist: &DiscreteDistribution, policy: ClipPolicy) -> f64 {
    dist.probs
        .iter()
        .map(|&p| {
            let p = clip_probability(p, policy);
            p * p.ln()
        })
        .sum()
}

/// Natural log of the clipped probability the distribution assigns to `label`.
pub fn log_likelihood(
    dist: &DiscreteDistribution,
    label: usize,
    policy: ClipPolicy,
) -> Result<f64> {
    let p = dist.probs.get(label).ok_or(Error::LabelOutOfRange {
        label,
        classes: dist.num_classes(),
    })?;
    Ok(clip_probability(*p, policy).ln())
}

/// Negative entropy of a binary prediction `(1 - p, p)` after clipping `p`.
pub fn binary_negative_entropy(prob: f64, policy: ClipPolicy) -> f64 {
    let p = clip_probability(prob, policy);
    p * p.ln() + (1.0 - p) * (1.0 - p).ln()
}

/// Per-sample binary log-likelihood `x ln p + (1 - x) ln(1 - p)` on the clipped probability.
pub fn binary_log_likelihood(prob: f64, label: u8, policy: ClipPolicy) -> f64 {
    let p = clip_probability(prob, policy);
    if label == 1 {
        p.ln()
    } else {
        (1.0 - p).ln()
    }
}

/// General discrete ECD: mean of `negative_entropy - log_likelihood`.
pub fn ecd_discrete(
    dists: &[DiscreteDistribution],
    labels: &[usize],
    policy: ClipPolicy,
) -> Result<f64> {
    if dists.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: dists.len(),
            right: labels.len(),
        });
    }
    if dists.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let scores = dists
        .iter()
        .zip(labels)
        .map(|(d, &l)| Ok(negative_entropy(d, policy) - log_likelihood(d, l, policy)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_mean(&scores).expect("non-empty"))
}

/// Mean negative log-likelihood of the labels.
pub fn nll(data: &Dataset, policy: ClipPolicy) -> Result<f64> {
    data.ensure_non_empty()?;
    let losses: Vec<f64> = data
        .iter()
        .map(|r| -binary_log_likelihood(r.prob, r.label, policy))
        .collect();
    Ok(pairwise_mean(&losses).expect("non-empty"))
}

/// Mean per-record negative entropy; `ecd_binary = nll + mean_negative_entropy`.
pub fn mean_negative_entropy(data: &Dataset, policy: ClipPolicy) -> Result<f64> {
    data.ensure_non_empty()?;
    let values: Vec<f64> = data
        .iter()
        .map(|r| binary_negative_entropy(r.prob, policy))
        .collect();
    Ok(pairwise_mean(&values).expect("non-empty"))
}

/// Brier score on raw (unclipped) probabilities.
pub fn brier(data: &Dataset) -> Result<f64> {
    data.ensure_non_empty()?;
    let sq: Vec<f64> = data
        .iter()
        .map(|r| {
            let d = r.prob - f64::from(r.label);
            d * d
        })
        .collect();
    Ok(pairwise_mean(&sq).expect("non-empty"))
}

/// One point of the per-sample ECD curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub prob: f64,
    pub score_label0: f64,
    pub score_label1: f64,
}

/// Evaluates the per-sample ECD for both labels on `grid_size` evenly spaced
/// probabilities spanning `[epsilon, 1 - epsilon]`.
///
/// The grid is built symmetrically around 0.5, so an odd `grid_size` hits
/// 0.5 exactly.
pub fn ecd_curve(grid_size: usize, policy: ClipPolicy) -> Result<Vec<CurvePoint>> {
    if grid_size < 2 {
        return Err(Error::InvalidGridSize(grid_size));
    }
    let span = 1.0 - 2.0 * policy.epsilon;
    let last = (grid_size - 1) as f64;
    Ok((0..grid_size)
        .map(|i| {
            let offset = (2.0 * i as f64 - last) / (2.0 * last);
            let prob = clip_probability(0.5 + offset * span, policy);
            CurvePoint {
                prob,
                score_label0: ecd_sample_binary(prob, 0, policy),
                score_label1: ecd_sample_binary(prob, 1, policy),
            }
        })
        .collect())
}

/// The lowest score on a curve across both labels, as `(prob, label, score)`.
pub fn curve_minimum(curve: &[CurvePoint]) -> Option<(f64, u8, f64)> {
    curve
        .iter()
        .flat_map(|c| [(c.prob, 0u8, c.score_label0), (c.prob, 1u8, c.score_label1)])
        .min_by(|a, b| a.2.total_cmp(&b.2))
}
