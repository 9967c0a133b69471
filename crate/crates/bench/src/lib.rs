//! Fixed inputs shared by the benchmarks.

use mominq_core::{DiscreteLaw, DistributionPair, FiniteDistribution};

/// A law with `n` atoms spread log-uniformly over `[1e-2, 1e2]` with
/// linearly increasing masses.
pub fn fixture_law(n: usize) -> DiscreteLaw {
    let pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let t = if n > 1 {
                i as f64 / (n - 1) as f64
            } else {
                0.5
            };
            (10f64.powf(4.0 * t - 2.0), (i + 1) as f64)
        })
        .collect();
    DiscreteLaw::new(&pairs, true).expect("fixture law is valid")
}

/// Two distributions of length `n`, one increasing and one uniform.
pub fn fixture_pair(n: usize) -> DistributionPair {
    let total = (n * (n + 1) / 2) as f64;
    let p = FiniteDistribution::new((1..=n).map(|i| i as f64 / total).collect()).unwrap();
    let q = FiniteDistribution::new(vec![1.0 / n as f64; n]).unwrap();
    DistributionPair::new(p, q).unwrap()
}
