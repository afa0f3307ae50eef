//! Equal-width reliability binning and the calibration report.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{self, ClipPolicy, Dataset};
use crate::summation::{pairwise_mean, pairwise_sum};

/// Tolerance for the weighted per-bin ECD matching the global mean.
pub const ECD_CONSISTENCY_TOLERANCE: f64 = 1e-12;

/// `M` equal-width bins over `[0, 1]`. Bin `m` covers `[m/M, (m+1)/M)`,
/// the last bin is closed at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinSpec {
    num_bins: usize,
}

impl BinSpec {
    pub const DEFAULT_BINS: usize = 10;

    pub fn new(num_bins: usize) -> Result<Self> {
        if num_bins == 0 {
            Err(Error::InvalidBinCount)
        } else {
            Ok(Self { num_bins })
        }
    }

    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    /// Left edge of bin `m`; `edge(M)` is 1.
    pub fn edge(&self, m: usize) -> f64 {
        m as f64 / self.num_bins as f64
    }

    /// `(lower, upper)` bounds of bin `m`.
    pub fn bounds(&self, m: usize) -> (f64, f64) {
        (self.edge(m), self.edge(m + 1))
    }
}

impl Default for BinSpec {
    fn default() -> Self {
        Self {
            num_bins: Self::DEFAULT_BINS,
        }
    }
}

/// Index of the bin containing `prob`.
pub fn assign_bin(prob: f64, spec: BinSpec) -> Result<usize> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::ProbabilityOutOfRange(prob));
    }
    let last = spec.num_bins - 1;
    let mut idx = ((prob * spec.num_bins as f64).floor() as usize).min(last);
    // `prob * M` can land one ulp on the wrong side of an edge; compare
    // against the same edge values used for thresholds.
    if idx < last && prob >= spec.edge(idx + 1) {
        idx += 1;
    } else if idx > 0 && prob < spec.edge(idx) {
        idx -= 1;
    }
    Ok(idx)
}

/// Statistics for one bin. Value fields are `None` for empty bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinStats {
    pub index: usize,
    pub count: usize,
    pub conf: Option<f64>,
    pub frac_pos: Option<f64>,
    pub ece_bin: Option<f64>,
    pub esce_bin: Option<f64>,
    pub ecd_bin: Option<f64>,
}

impl BinStats {
    fn empty(index: usize) -> Self {
        Self {
            index,
            count: 0,
            conf: None,
            frac_pos: None,
            ece_bin: None,
            esce_bin: None,
            ecd_bin: None,
        }
    }

    pub fn is_populated(&self) -> bool {
        self.count > 0
    }
}

/// Per-bin statistics for every bin in `spec`, populated or not.
pub fn bin_stats(data: &Dataset, spec: BinSpec, policy: ClipPolicy) -> Result<Vec<BinStats>> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); spec.num_bins];
    for (i, r) in data.iter().enumerate() {
        members[assign_bin(r.prob(), spec)?].push(i);
    }
    let records = data.records();
    Ok(members
        .iter()
        .enumerate()
        .map(|(index, idx)| {
            if idx.is_empty() {
                return BinStats::empty(index);
            }
            let probs: Vec<f64> = idx.iter().map(|&i| records[i].prob()).collect();
            let labels: Vec<f64> = idx.iter().map(|&i| f64::from(records[i].label())).collect();
            let scores: Vec<f64> = idx
                .iter()
                .map(|&i| metrics::ecd_sample_binary(records[i].prob(), records[i].label(), policy))
                .collect();
            // The exact mean lies between the extremes; clamp away rounding.
            let lo = probs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let conf = pairwise_mean(&probs).unwrap().clamp(lo, hi);
            let frac_pos = pairwise_mean(&labels).unwrap();
            let esce = frac_pos - conf;
            BinStats {
                index,
                count: idx.len(),
                conf: Some(conf),
                frac_pos: Some(frac_pos),
                ece_bin: Some(esce.abs()),
                esce_bin: Some(esce),
                ecd_bin: Some(pairwise_mean(&scores).unwrap()),
            }
        })
        .collect())
}

fn weighted_sum(
    bins: &[BinStats],
    n_total: usize,
    value: impl Fn(&BinStats) -> Option<f64>,
) -> Result<f64> {
    if n_total == 0 {
        return Err(Error::EmptyDataset);
    }
    let counted: usize = bins.iter().map(|b| b.count).sum();
    if counted != n_total {
        return Err(Error::DimensionMismatch(format!(
            "bin counts sum to {counted}, expected {n_total}"
        )));
    }
    let n = n_total as f64;
    let terms: Vec<f64> = bins
        .iter()
        .filter_map(|b| value(b).map(|v| b.count as f64 / n * v))
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Count-weighted mean absolute gap between fraction of positives and confidence.
pub fn ece(bins: &[BinStats], n_total: usize) -> Result<f64> {
    weighted_sum(bins, n_total, |b| b.ece_bin)
}

/// Signed counterpart of [`ece`]; under- and over-confident bins can cancel.
pub fn esce(bins: &[BinStats], n_total: usize) -> Result<f64> {
    weighted_sum(bins, n_total, |b| b.esce_bin)
}

/// Count-weighted sum of per-bin ECD. Equals the global ECD for any binning.
pub fn weighted_ecd(bins: &[BinStats], n_total: usize) -> Result<f64> {
    weighted_sum(bins, n_total, |b| b.ecd_bin)
}

/// Per-bin rows plus the weighted-sum row and global scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub num_bins: usize,
    pub bins: Vec<BinStats>,
    pub n_total: usize,
    pub ece: f64,
    pub esce: f64,
    pub ecd: f64,
    pub brier: f64,
    pub nll: f64,
}

impl CalibrationReport {
    pub fn spec(&self) -> BinSpec {
        BinSpec {
            num_bins: self.num_bins,
        }
    }
}

pub fn build_report(
    data: &Dataset,
    spec: BinSpec,
    policy: ClipPolicy,
) -> Result<CalibrationReport> {
    let bins = bin_stats(data, spec, policy)?;
    let n_total = data.len();
    let ecd = weighted_ecd(&bins, n_total)?;
    let global = metrics::ecd_binary(data, policy)?;
    assert!(
        (ecd - global).abs() <= ECD_CONSISTENCY_TOLERANCE * global.abs().max(1.0),
        "binned ECD {ecd} disagrees with global ECD {global}"
    );
    Ok(CalibrationReport {
        num_bins: spec.num_bins,
        ece: ece(&bins, n_total)?,
        esce: esce(&bins, n_total)?,
        ecd,
        brier: metrics::brier(data)?,
        nll: metrics::nll(data, policy)?,
        bins,
        n_total,
    })
}

/// A populated bin's `(conf, frac_pos, count)` for a reliability diagram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityPoint {
    pub bin: usize,
    pub conf: f64,
    pub frac_pos: f64,
    pub count: usize,
}

pub fn reliability_points(bins: &[BinStats]) -> Vec<ReliabilityPoint> {
    let mut points: Vec<ReliabilityPoint> = bins
        .iter()
        .filter_map(|b| match (b.conf, b.frac_pos) {
            (Some(conf), Some(frac_pos)) => Some(ReliabilityPoint {
                bin: b.index,
                conf,
                frac_pos,
                count: b.count,
            }),
            _ => None,
        })
        .collect();
    points.sort_by_key(|p| p.bin);
    points
}
