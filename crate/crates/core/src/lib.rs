//! Calibration metrics for binary classifiers and Gaussian state estimators.
//!
//! The central score is the entropic calibration difference (ECD): the mean
//! gap between each prediction's negative entropy and the log-likelihood it
//! assigns to the observed outcome. Unlike ECE it is signed and asymmetric,
//! penalising over-confidence far more than under-confidence. For Gaussian
//! predictions it reduces to `(NEES - d) / 2`.
//!
//! Modules:
//! - [`metrics`]: per-sample and aggregate ECD, NLL, entropy, Brier.
//! - [`binning`]: reliability bins, ECE/ESCE and the calibration report.
//! - [`gaussian`]: NEES and Gaussian ECD.
//! - [`simulation`]: seeded synthetic miscalibrated classifier.
//! - [`io`]: CSV ingestion, report rendering and SVG plots.

pub mod binning;
pub mod error;
pub mod gaussian;
pub mod io;
pub mod metrics;
pub mod simulation;
pub mod summation;

pub use binning::{
    assign_bin, bin_stats, build_report, ece, esce, reliability_points, weighted_ecd, BinSpec,
    BinStats, CalibrationReport, ReliabilityPoint,
};
pub use error::{Error, Result};
pub use gaussian::{
    ecd_gaussian, gaussian_log_density, gaussian_negative_entropy, mahalanobis_sq, nees,
    GaussianPrediction, GaussianSummary,
};
pub use metrics::{
    brier, clip_probability, ecd_binary, ecd_curve, ecd_discrete, ecd_sample_binary,
    log_likelihood, negative_entropy, nll, ClipPolicy, CurvePoint, Dataset, DiscreteDistribution,
    PredictionRecord,
};
pub use simulation::{
    logistic, run_noise_suite, simulate, SimulatedDataset, SimulationConfig, SuiteRun,
};
