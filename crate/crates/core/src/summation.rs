//! Deterministic pairwise summation.
//!
//! Every mean taken over a dataset in this crate goes through [`pairwise_sum`].
//! The split points depend only on the slice length, so the result is
//! identical for identical input order regardless of how the per-element
//! values were produced (sequentially or in parallel).

const BLOCK: usize = 8;

/// Sum `values` by recursive halving, with a sequential base case of at most
/// eight elements. Rounding error grows as O(log n) rather than O(n).
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= BLOCK {
        return values.iter().fold(0.0, |acc, &v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Arithmetic mean via [`pairwise_sum`]. Returns `None` for an empty slice.
pub fn pairwise_mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(pairwise_sum(values) / values.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sums_are_exact() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.0]), 6.0);
        assert_eq!(pairwise_mean(&[2.0, 4.0]), Some(3.0));
        assert_eq!(pairwise_mean(&[]), None);
    }

    #[test]
    fn beats_naive_on_long_runs() {
        // 0.1 is not representable; a naive running sum drifts visibly by 1e6 terms.
        let values = vec![0.1; 1_000_000];
        let naive: f64 = values.iter().sum();
        let pairwise = pairwise_sum(&values);
        assert!((pairwise - 100_000.0).abs() < (naive - 100_000.0).abs());
        assert!((pairwise - 100_000.0).abs() < 1e-8);
    }

    #[test]
    fn depends_only_on_order() {
        let values: Vec<f64> = (0..1000)
            .map(|i| ((i * 7919) % 1000) as f64 / 997.0)
            .collect();
        assert_eq!(
            pairwise_sum(&values).to_bits(),
            pairwise_sum(&values.clone()).to_bits()
        );
    }
}
