//! Binomial confidence intervals.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Standard normal quantile.
pub fn z_quantile(q: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("unit normal").inverse_cdf(q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

fn wilson_with_z(successes: u64, trials: u64, z: f64) -> Interval {
    if trials == 0 {
        return Interval {
            low: 0.0,
            high: 1.0,
        };
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let mut low = (centre - half).max(0.0);
    let mut high = (centre + half).min(1.0);
    // the score interval always contains 0 when x = 0 and 1 when x = n
    if successes == 0 {
        low = 0.0;
    }
    if successes == trials {
        high = 1.0;
    }
    Interval { low, high }
}

/// Two-sided Wilson score interval at the given confidence level.
pub fn wilson(successes: u64, trials: u64, confidence: f64) -> Interval {
    wilson_with_z(successes, trials, z_quantile(0.5 + confidence / 2.0))
}

/// One-sided Wilson upper bound at the given confidence level.
pub fn wilson_upper(successes: u64, trials: u64, confidence: f64) -> f64 {
    wilson_with_z(successes, trials, z_quantile(confidence)).high
}

/// One-sided Wilson lower bound at the given confidence level.
pub fn wilson_lower(successes: u64, trials: u64, confidence: f64) -> f64 {
    wilson_with_z(successes, trials, z_quantile(confidence)).low
}

/// One-sided upper confidence bound on `p₁ − p₂` (Newcombe's hybrid
/// score method).
pub fn difference_upper(x1: u64, n1: u64, x2: u64, n2: u64, confidence: f64) -> f64 {
    let z = z_quantile(confidence);
    let p1 = x1 as f64 / n1 as f64;
    let p2 = x2 as f64 / n2 as f64;
    let u1 = wilson_with_z(x1, n1, z).high;
    let l2 = wilson_with_z(x2, n2, z).low;
    (p1 - p2) + ((u1 - p1).powi(2) + (p2 - l2).powi(2)).sqrt()
}
