//! NEES and Gaussian ECD for state estimates.
//!
//! For a Gaussian prediction `N(mean, C)` and true state `x`, the per-sample
//! ECD is `½ (x - mean)ᵀ C⁻¹ (x - mean) - d/2`, so the mean ECD is
//! `(NEES - d) / 2`. A consistent estimator has NEES = d and ECD = 0.
//!
//! Quadratic forms and log-determinants go through a Cholesky factorization;
//! no matrix is ever inverted explicitly.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::summation::pairwise_mean;

const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Lower-triangular Cholesky factor `L` of an SPD matrix, `C = L Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    dim: usize,
    /// Row-major, upper triangle zero.
    lower: Vec<f64>,
}

impl Cholesky {
    /// Factorizes a row-major `dim × dim` matrix. Rejects asymmetric input
    /// and any matrix whose pivots are not strictly positive.
    pub fn new(matrix: &[f64], dim: usize) -> Result<Self> {
        if dim == 0 || matrix.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "covariance has {} entries, expected {}",
                matrix.len(),
                dim * dim
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotPositiveDefinite { index: None });
        }
        let scale = matrix.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..dim {
            for j in 0..i {
                if (matrix[i * dim + j] - matrix[j * dim + i]).abs() > SYMMETRY_TOLERANCE * scale {
                    return Err(Error::NotSymmetric { index: None });
                }
            }
        }

        let mut lower = vec![0.0; dim * dim];
        for j in 0..dim {
            let mut diag = matrix[j * dim + j];
            for k in 0..j {
                diag -= lower[j * dim + k] * lower[j * dim + k];
            }
            if diag <= 0.0 || !diag.is_finite() {
                return Err(Error::NotPositiveDefinite { index: None });
            }
            let ljj = diag.sqrt();
            lower[j * dim + j] = ljj;
            for i in (j + 1)..dim {
                let mut v = matrix[i * dim + j];
                for k in 0..j {
                    v -= lower[i * dim + k] * lower[j * dim + k];
                }
                lower[i * dim + j] = v / ljj;
            }
        }
        Ok(Self { dim, lower })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry `(i, j)` of `L`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.dim + j]
    }

    /// Solves `L z = b` by forward substitution.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut z = vec![0.0; n];
        for i in 0..n {
            let row = &self.lower[i * n..i * n + i];
            let v = b[i] - row.iter().zip(&z[..i]).map(|(l, z)| l * z).sum::<f64>();
            z[i] = v / self.lower[i * n + i];
        }
        z
    }

    /// `L v`.
    pub fn mul_lower(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|i| (0..=i).map(|k| self.lower[i * n + k] * v[k]).sum())
            .collect()
    }

    /// `bᵀ C⁻¹ b = |L⁻¹ b|²`.
    pub fn quadratic_form(&self, b: &[f64]) -> f64 {
        self.solve_lower(b).iter().map(|z| z * z).sum()
    }

    /// `ln |C| = 2 Σ ln L_ii`.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim).map(|i| self.get(i, i).ln()).sum::<f64>()
    }
}

/// Predicted mean, covariance and true state for one estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaussianRecord", into = "GaussianRecord")]
pub struct GaussianPrediction {
    mean: Vec<f64>,
    covariance: Vec<f64>,
    truth: Vec<f64>,
    factor: Cholesky,
}

/// Wire form of a [`GaussianPrediction`]: covariance as nested rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianRecord {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub truth: Vec<f64>,
}

impl TryFrom<GaussianRecord> for GaussianPrediction {
    type Error = Error;

    fn try_from(r: GaussianRecord) -> Result<Self> {
        let d = r.mean.len();
        if r.covariance.len() != d || r.covariance.iter().any(|row| row.len() != d) {
            return Err(Error::DimensionMismatch(format!(
                "covariance must be {d}x{d} to match the mean"
            )));
        }
        GaussianPrediction::new(r.mean, r.covariance.concat(), r.truth)
    }
}

impl From<GaussianPrediction> for GaussianRecord {
    fn from(p: GaussianPrediction) -> Self {
        let d = p.dim();
        GaussianRecord {
            covariance: p.covariance.chunks(d).map(<[f64]>::to_vec).collect(),
            mean: p.mean,
            truth: p.truth,
        }
    }
}

impl GaussianPrediction {
    /// `covariance` is row-major `d × d` with `d = mean.len()`.
    pub fn new(mean: Vec<f64>, covariance: Vec<f64>, truth: Vec<f64>) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::DimensionMismatch(
                "dimension must be at least 1".into(),
            ));
        }
        if truth.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "mean has dimension {d}, truth has {}",
                truth.len()
            )));
        }
        let factor = Cholesky::new(&covariance, d)?;
        Ok(Self {
            mean,
            covariance,
            truth,
            factor,
        })
    }

    /// One-dimensional prediction with standard deviation `sigma`.
    pub fn scalar(mean: f64, sigma: f64, truth: f64) -> Result<Self> {
        Self::new(vec![mean], vec![sigma * sigma], vec![truth])
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &[f64] {
        &self.covariance
    }

    pub fn truth(&self) -> &[f64] {
        &self.truth
    }

    pub fn factor(&self) -> &Cholesky {
        &self.factor
    }

    pub fn residual(&self) -> Vec<f64> {
        self.truth
            .iter()
            .zip(&self.mean)
            .map(|(x, m)| x - m)
            .collect()
    }
}

/// `(x - μ)ᵀ C⁻¹ (x - μ)`.
pub fn mahalanobis_sq(pred: &GaussianPrediction) -> f64 {
    pred.factor.quadratic_form(&pred.residual())
}

fn common_dim(preds: &[GaussianPrediction]) -> Result<usize> {
    let first = preds.first().ok_or(Error::EmptyDataset)?.dim();
    if let Some((i, p)) = preds.iter().enumerate().find(|(_, p)| p.dim() != first) {
        return Err(Error::DimensionMismatch(format!(
            "prediction {i} has dimension {}, expected {first}",
            p.dim()
        )));
    }
    Ok(first)
}

/// Mean Mahalanobis-squared residual. Expected value `d` for a consistent estimator.
pub fn nees(preds: &[GaussianPrediction]) -> Result<f64> {
    common_dim(preds)?;
    let q: Vec<f64> = preds.iter().map(mahalanobis_sq).collect();
    Ok(pairwise_mean(&q).expect("non-empty"))
}

/// Mean of `½ q_i - d/2`; positive means over-confident, negative under-confident.
pub fn ecd_gaussian(preds: &[GaussianPrediction]) -> Result<f64> {
    let d = common_dim(preds)? as f64;
    let terms: Vec<f64> = preds
        .iter()
        .map(|p| 0.5 * mahalanobis_sq(p) - 0.5 * d)
        .collect();
    Ok(pairwise_mean(&terms).expect("non-empty"))
}

/// Gaussian ECD through the generic negative-entropy minus log-likelihood form.
pub fn ecd_gaussian_generic(preds: &[GaussianPrediction]) -> Result<f64> {
    common_dim(preds)?;
    let terms: Vec<f64> = preds
        .iter()
        .map(|p| negative_entropy_of(&p.factor) - gaussian_log_density(p))
        .collect();
    Ok(pairwise_mean(&terms).expect("non-empty"))
}

/// `ln N(x; μ, C) = -½ [d ln 2π + ln|C| + q]`.
pub fn gaussian_log_density(pred: &GaussianPrediction) -> f64 {
    let d = pred.dim() as f64;
    -0.5 * (d * (2.0 * PI).ln() + pred.factor.log_det() + mahalanobis_sq(pred))
}

/// `∫ p ln p = -½ [d ln 2π + ln|C| + d]` for a row-major SPD covariance.
pub fn gaussian_negative_entropy(covariance: &[f64], dim: usize) -> Result<f64> {
    Ok(negative_entropy_of(&Cholesky::new(covariance, dim)?))
}

fn negative_entropy_of(factor: &Cholesky) -> f64 {
    let d = factor.dim() as f64;
    -0.5 * (d * (2.0 * PI).ln() + factor.log_det() + d)
}

/// Summary produced by the `gaussian` command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSummary {
    pub nees: f64,
    pub ecd: f64,
    pub d: usize,
    pub n: usize,
}

pub fn summarize(preds: &[GaussianPrediction]) -> Result<GaussianSummary> {
    Ok(GaussianSummary {
        d: common_dim(preds)?,
        nees: nees(preds)?,
        ecd: ecd_gaussian(preds)?,
        n: preds.len(),
    })
}

/// Parses a JSON array of `{mean, covariance, truth}` records. Covariance
/// errors carry the index of the offending record.
pub fn predictions_from_json(text: &str) -> Result<Vec<GaussianPrediction>> {
    let records: Vec<GaussianRecord> = serde_json::from_str(text)?;
    records
        .into_iter()
        .enumerate()
        .map(|(i, r)| GaussianPrediction::try_from(r).map_err(|e| e.at_index(i)))
        .collect()
}
