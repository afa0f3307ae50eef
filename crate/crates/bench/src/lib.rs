//! Shared fixtures for the criterion benchmarks.

use ecd_core::{simulate, Dataset, SimulationConfig};

/// Simulated `(prob, label)` dataset of size `n` with log-odds noise `sigma`.
pub fn simulated(n: usize, sigma: f64) -> Dataset {
    let cfg = SimulationConfig {
        n,
        noise_sigma: sigma,
        seed: 2024,
        ..Default::default()
    };
    simulate(&cfg).expect("valid config").dataset()
}
