//! Reverse water-filling for a Gaussian source with independent modes.
//!
//! Mode `i` with variance `lambda_i` is reproduced with distortion
//! `min(lambda_i, xi)`; the level `xi` is set so the total rate
//! `sum ln(lambda_i / D_i)` matches the budget.

use serde::{Deserialize, Serialize};

/// Modes below this fraction of the largest eigenvalue are treated as zero.
pub const RANK_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waterfill {
    /// Water level.
    pub xi: f64,
    /// Total distortion `sum D_i`.
    pub d_c: f64,
    /// Per-mode distortion, aligned with the input eigenvalues.
    pub allocations: Vec<f64>,
}

fn effective(eigenvalues: &[f64]) -> Vec<f64> {
    let max = eigenvalues.iter().copied().fold(0.0_f64, f64::max);
    eigenvalues
        .iter()
        .map(|&l| if l > RANK_FLOOR * max && l > 0.0 { l } else { 0.0 })
        .collect()
}

/// Rate `sum ln(lambda_i / min(lambda_i, xi))` spent at water level `xi`.
pub fn rate_at_level(eigenvalues: &[f64], xi: f64) -> f64 {
    effective(eigenvalues)
        .iter()
        .filter(|&&l| l > xi)
        .map(|&l| (l / xi).ln())
        .sum()
}

/// Solves the reverse water-filling problem for a rate budget in nats.
///
/// The active set is found exactly: with the `k` largest modes above the
/// water level, `xi = exp((sum_{i<=k} ln lambda_i - R) / k)`.
pub fn reverse_waterfill(eigenvalues: &[f64], rate_budget: f64) -> Waterfill {
    let lambda = effective(eigenvalues);
    let mut sorted: Vec<f64> = lambda.iter().copied().filter(|&l| l > 0.0).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = sorted.iter().sum();

    if sorted.is_empty() {
        return Waterfill {
            xi: 0.0,
            d_c: 0.0,
            allocations: vec![0.0; eigenvalues.len()],
        };
    }
    let rate = rate_budget.max(0.0);
    if rate == 0.0 {
        return Waterfill {
            xi: sorted[0],
            d_c: total,
            allocations: lambda,
        };
    }

    let mut log_sum = 0.0;
    let mut xi = 0.0;
    for k in 0..sorted.len() {
        log_sum += sorted[k].ln();
        let level = ((log_sum - rate) / (k + 1) as f64).exp();
        let next = sorted.get(k + 1).copied().unwrap_or(0.0);
        if level >= next {
            xi = level.min(sorted[k]);
            break;
        }
    }
    let allocations: Vec<f64> = lambda.iter().map(|&l| l.min(xi)).collect();
    Waterfill {
        xi,
        d_c: allocations.iter().sum(),
        allocations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate_keeps_all_variance() {
        let w = reverse_waterfill(&[3.0, 1.0, 0.5], 0.0);
        assert_eq!(w.d_c, 4.5);
        assert_eq!(w.xi, 3.0);
    }

    #[test]
    fn single_mode_decays_exponentially() {
        let w = reverse_waterfill(&[1.0], 4.0_f64.ln());
        assert!((w.d_c - 0.25).abs() < 1e-15);
    }

    #[test]
    fn two_modes_equal_level() {
        // ln(4 / xi) + ln(1 / min(1, xi)) = ln 4  =>  xi = 1
        let w = reverse_waterfill(&[4.0, 1.0], 4.0_f64.ln());
        assert!((w.xi - 1.0).abs() < 1e-15);
        assert_eq!(w.allocations, vec![1.0, 1.0]);
        assert!((w.d_c - 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_modes_are_ignored() {
        let w = reverse_waterfill(&[2.0, 0.0, 1e-20], 1.0);
        assert_eq!(w.allocations[1], 0.0);
        assert_eq!(w.allocations[2], 0.0);
        assert!((w.d_c - 2.0 * (-1.0_f64).exp()).abs() < 1e-15);
        let empty = reverse_waterfill(&[0.0, 0.0], 3.0);
        assert_eq!(empty.d_c, 0.0);
    }

    #[test]
    fn level_reproduces_rate() {
        let eig = [5.0, 2.0, 2.0, 0.3, 0.01];
        for r in [0.1, 0.9, 2.5, 7.0, 30.0] {
            let w = reverse_waterfill(&eig, r);
            assert!((rate_at_level(&eig, w.xi) - r).abs() < 1e-12, "r={r}");
        }
    }
}
