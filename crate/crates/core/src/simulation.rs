//! Synthetic miscalibrated binary classifier.
//!
//! Each sample draws an unscaled log-odds `u' ~ Uniform(-h, h)`, scales it to
//! `u = W u'`, sets the true probability `p = logistic(u)` and the label
//! `L ~ Bernoulli(p)`. The reported probability is `logistic(u + ε)` with
//! `ε ~ Normal(μ, σ²)`; with `σ = 0` and `μ = 0` the classifier is calibrated.
//!
//! # Random stream
//!
//! [`SimRng`] is ChaCha20. The 256-bit key is four successive SplitMix64
//! outputs of the 64-bit seed, little-endian; the ChaCha stream id selects
//! an independent sequence under the same key. Per sample the draws are, in
//! order: one uniform for `u'`, one uniform for the label, two uniforms for
//! the Box–Muller normal. Uniforms take the top 53 bits of a `u64`.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::binning::{build_report, BinSpec, CalibrationReport};
use crate::error::{Error, Result};
use crate::gaussian::GaussianPrediction;
use crate::metrics::{ClipPolicy, Dataset, PredictionRecord};

/// Seeded ChaCha20 generator with explicit uniform/normal/Bernoulli draws.
#[derive(Debug, Clone)]
pub struct SimRng {
    inner: ChaCha20Rng,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SimRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut state = seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut inner = ChaCha20Rng::from_seed(key);
        inner.set_stream(stream);
        Self { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal by Box–Muller, cosine branch only.
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform(); // (0, 1]
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}

/// Standard logistic function, evaluated without overflow for large `|u|`.
pub fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n: usize,
    pub logodds_halfwidth: f64,
    pub weight: f64,
    pub noise_mean: f64,
    pub noise_sigma: f64,
    pub seed: u64,
    /// ChaCha stream id; [`run_noise_suite`] assigns one per sigma.
    pub stream: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            n: 10_000,
            logodds_halfwidth: 10.0,
            weight: 0.5,
            noise_mean: 0.0,
            noise_sigma: 0.0,
            seed: 0,
            stream: 0,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.n == 0 {
            return bad("n must be at least 1");
        }
        if !(self.logodds_halfwidth > 0.0 && self.logodds_halfwidth.is_finite()) {
            return bad("logodds_halfwidth must be positive and finite");
        }
        if !(self.weight > 0.0 && self.weight.is_finite()) {
            return bad("weight must be positive and finite");
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad("noise_sigma must be non-negative and finite");
        }
        if !self.noise_mean.is_finite() {
            return bad("noise_mean must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedDataset {
    pub true_logodds: Vec<f64>,
    pub true_probs: Vec<f64>,
    pub labels: Vec<u8>,
    pub estimated_probs: Vec<f64>,
}

impl SimulatedDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `(estimated_prob, label)` view.
    pub fn dataset(&self) -> Dataset {
        self.estimated_probs
            .iter()
            .zip(&self.labels)
            .map(|(&p, &l)| {
                PredictionRecord::new(p, i64::from(l)).expect("simulated values are valid")
            })
            .collect()
    }
}

pub fn simulate(config: &SimulationConfig) -> Result<SimulatedDataset> {
    config.validate()?;
    let mut rng = SimRng::new(config.seed, config.stream);
    let h = config.logodds_halfwidth;
    let mut out = SimulatedDataset {
        true_logodds: Vec::with_capacity(config.n),
        true_probs: Vec::with_capacity(config.n),
        labels: Vec::with_capacity(config.n),
        estimated_probs: Vec::with_capacity(config.n),
    };
    for _ in 0..config.n {
        let unscaled = -h + 2.0 * h * rng.uniform();
        let u = config.weight * unscaled;
        let p = logistic(u);
        let label = rng.bernoulli(p);
        let eps = config.noise_mean + config.noise_sigma * rng.standard_normal();
        out.true_logodds.push(u);
        out.true_probs.push(p);
        out.labels.push(u8::from(label));
        out.estimated_probs.push(logistic(u + eps));
    }
    Ok(out)
}

/// Noise levels used for the three-run experiment.
pub const DEFAULT_SIGMAS: [f64; 3] = [0.0, 0.5, 2.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRun {
    pub sigma: f64,
    pub config: SimulationConfig,
    pub report: CalibrationReport,
}

/// One simulation and report per sigma. Run `i` uses `base.seed` with
/// stream id `i`, so runs are independent of each other and of order.
pub fn run_noise_suite(
    base: &SimulationConfig,
    sigmas: &[f64],
    spec: BinSpec,
    policy: ClipPolicy,
) -> Result<Vec<SuiteRun>> {
    if sigmas.is_empty() {
        return Err(Error::InvalidConfig("sigma list is empty".into()));
    }
    sigmas
        .iter()
        .enumerate()
        .map(|(i, &sigma)| {
            let config = SimulationConfig {
                noise_sigma: sigma,
                stream: i as u64,
                ..*base
            };
            let data = simulate(&config)?.dataset();
            Ok(SuiteRun {
                sigma,
                config,
                report: build_report(&data, spec, policy)?,
            })
        })
        .collect()
}

/// `n` random `d`-dimensional Gaussian predictions whose truths are drawn
/// from their own predicted distributions, i.e. a consistent estimator.
///
/// Covariances are `A Aᵀ + 0.1 I` with `A` entries uniform on `[-1, 1]`,
/// means uniform on `[-10, 10]`.
pub fn sample_consistent_gaussians(
    n: usize,
    d: usize,
    seed: u64,
) -> Result<Vec<GaussianPrediction>> {
    if d == 0 {
        return Err(Error::DimensionMismatch(
            "dimension must be at least 1".into(),
        ));
    }
    let mut rng = SimRng::new(seed, 0);
    (0..n)
        .map(|_| {
            let a: Vec<f64> = (0..d * d).map(|_| 2.0 * rng.uniform() - 1.0).collect();
            let mut cov = vec![0.0; d * d];
            for i in 0..d {
                for j in 0..d {
                    cov[i * d + j] = (0..d).map(|k| a[i * d + k] * a[j * d + k]).sum::<f64>()
                        + if i == j { 0.1 } else { 0.0 };
                }
            }
            let mean: Vec<f64> = (0..d).map(|_| 20.0 * rng.uniform() - 10.0).collect();
            let factor = crate::gaussian::Cholesky::new(&cov, d)?;
            let z: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();
            let truth = factor
                .mul_lower(&z)
                .iter()
                .zip(&mean)
                .map(|(a, m)| a + m)
                .collect();
            GaussianPrediction::new(mean, cov, truth)
        })
        .collect()
}
