//! Random laws, distributions and orders for property tests and fuzzing.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use crate::divergence::{DistributionPair, FiniteDistribution};
use crate::exact::RationalLaw;
use crate::law::DiscreteLaw;

/// Shape of randomly drawn laws: atom count range and the range of `ln(value)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LawShape {
    pub atoms: (usize, usize),
    pub log_values: (f64, f64),
}

impl Default for LawShape {
    fn default() -> Self {
        Self {
            atoms: (2, 8),
            log_values: (1e-3f64.ln(), 1e3f64.ln()),
        }
    }
}

/// Masses uniform on `(0.001, 1]` before normalization; values log-uniform.
pub fn random_law<R: Rng + ?Sized>(rng: &mut R, shape: &LawShape) -> DiscreteLaw {
    let n = rng.random_range(shape.atoms.0..=shape.atoms.1);
    let pairs: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let v = rng
                .random_range(shape.log_values.0..=shape.log_values.1)
                .exp();
            let m = rng.random_range(0.001..=1.0);
            (v, m)
        })
        .collect();
    DiscreteLaw::new(&pairs, true).expect("sampled atoms are positive")
}

/// Rational law with values `n/d` (`1 <= n, d <= max_term`) and masses
/// proportional to integers in `1..=max_term`.
pub fn random_rational_law<R: Rng + ?Sized>(
    rng: &mut R,
    atoms: (usize, usize),
    max_term: i64,
) -> RationalLaw {
    let n = rng.random_range(atoms.0..=atoms.1);
    let weights: Vec<i64> = (0..n).map(|_| rng.random_range(1..=max_term)).collect();
    let total: i64 = weights.iter().sum();
    let pairs = weights
        .into_iter()
        .map(|w| {
            let value = BigRational::new(
                BigInt::from(rng.random_range(1..=max_term)),
                BigInt::from(rng.random_range(1..=max_term)),
            );
            (
                value,
                BigRational::new(BigInt::from(w), BigInt::from(total)),
            )
        })
        .collect::<Vec<_>>();
    RationalLaw::new(pairs).expect("sampled rational law is valid")
}

/// Distribution with entries uniform on `(0.001, 1]` before normalization.
pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, len: usize) -> FiniteDistribution {
    let raw: Vec<f64> = (0..len).map(|_| rng.random_range(0.001..=1.0)).collect();
    let total: f64 = raw.iter().sum();
    FiniteDistribution::new(raw.into_iter().map(|p| p / total).collect())
        .expect("sampled probabilities are positive")
}

/// Pair of independent random distributions of a common length in `2..=8`.
pub fn random_pair<R: Rng + ?Sized>(rng: &mut R) -> DistributionPair {
    let len = rng.random_range(2..=8);
    let p = random_distribution(rng, len);
    let q = random_distribution(rng, len);
    DistributionPair::new(p, q).expect("equal lengths")
}

/// `n` orders uniform on `range`.
pub fn random_orders<R: Rng + ?Sized>(rng: &mut R, n: usize, range: (f64, f64)) -> Vec<f64> {
    (0..n)
        .map(|_| rng.random_range(range.0..=range.1))
        .collect()
}
